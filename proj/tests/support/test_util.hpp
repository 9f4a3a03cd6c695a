#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reid/error.hpp"
#include "reid/image.hpp"

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("reid-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(std::string_view name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline reid::LabelImage labels(int w, int h, std::uint8_t fill = 0) {
  return reid::LabelImage{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, fill)};
}

inline std::span<const std::uint8_t> bytes_of(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Code of the reid::Error thrown by `fn`, nullopt when it returns normally.
inline std::optional<reid::ErrorCode> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const reid::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace testutil
