#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reid/config.hpp"
#include "reid/mask_ingest.hpp"
#include "reid/similarity.hpp"
#include "reid/texture_encoder.hpp"

namespace reid {

/// Immutable index of person feature vectors, one per gallery image.
///
/// File layout (`.reidx`, little-endian):
///   "REIDX\r\n\x1a" | u32 format version | str32 JSON header |
///   records: str32 image_id | str32 relative path | u8 region bitmask |
///            u8 flags (bit 0: texture) |
///            per present region, in class order: 3 x u64 histogram words (L,a,b),
///                                                3 x f64 representative Lab |
///            texture: 2 x f64 when flagged
/// The header holds format_version, fingerprint, encoder_version, config
/// (text form), record_count and images_root.
class FeatureStore {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  FeatureStore() = default;
  /// Throws InvalidArgument on duplicate image ids.
  FeatureStore(std::string fingerprint, std::string encoder_version, PipelineConfig config, std::string images_root,
               std::vector<PersonFeatureVector> records, std::vector<std::string> relative_paths);

  const std::string& fingerprint() const { return fingerprint_; }
  const std::string& encoder_version() const { return encoder_version_; }
  const PipelineConfig& config() const { return config_; }
  const std::string& images_root() const { return images_root_; }
  std::span<const PersonFeatureVector> records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  std::optional<std::size_t> find(std::string_view image_id) const;
  const std::string& relative_path(std::size_t i) const { return paths_[i]; }

  std::vector<std::uint8_t> serialize() const;
  /// Throws StoreFormatError on malformed input.
  static FeatureStore parse(std::span<const std::uint8_t> bytes);

  void save(const std::string& path) const;
  /// Throws StoreFormatError, or FingerprintMismatch when `expected_fingerprint`
  /// is given and differs from the stored one.
  static FeatureStore load(const std::string& path, const std::optional<std::string>& expected_fingerprint = {});

 private:
  std::string fingerprint_;
  std::string encoder_version_;
  PipelineConfig config_;
  std::string images_root_;
  std::vector<PersonFeatureVector> records_;
  std::vector<std::string> paths_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

struct SkippedImage {
  std::string path;
  std::string error_code;
  std::string message;
};

struct IndexBuildResult {
  FeatureStore store;
  std::vector<SkippedImage> skipped;
};

/// Indexes every image below `images_dir` (sorted by relative path). The mask
/// of `a/b.jpg` is `<masks_dir>/a/b.png`, falling back to `<masks_dir>/b.png`.
/// The image id is the relative path without extension. Images that fail
/// (missing mask, decode or label errors) are skipped and reported.
/// Throws EmptyCorpus when nothing could be indexed.
IndexBuildResult build_index(const std::string& images_dir, const std::string& masks_dir, const PipelineConfig& cfg,
                             const LabelMapping& mapping, const EncoderModel& encoder);

}  // namespace reid
