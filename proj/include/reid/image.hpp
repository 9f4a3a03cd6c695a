#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace reid {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Row-major interleaved RGB image.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Row-major single-channel float image, intensities in [0,1].
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Row-major 8-bit label image as produced by a human parser.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;
};

// Decoding/encoding. All throw reid::Error(DecodeError) on malformed input.

/// Any format OpenCV understands (JPEG, PNG, BMP...).
RgbImage decode_image(std::span<const std::uint8_t> bytes);
/// 8-bit single-channel or palette PNG; palette indices are returned untouched.
LabelImage decode_label_png(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_jpeg(const RgbImage& image, int quality = 90);
std::vector<std::uint8_t> encode_label_png(const LabelImage& labels);

/// Area-averaging resample (OpenCV INTER_AREA when shrinking, linear when growing).
GrayImage resize(const GrayImage& image, int width, int height);
RgbImage resize(const RgbImage& image, int width, int height);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace reid
