#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reid/color_features.hpp"
#include "reid/mask_ingest.hpp"
#include "reid/similarity.hpp"
#include "reid/texture_space.hpp"

namespace reid {

/// Everything needed to turn crops into feature vectors and score them.
///
/// Extraction settings (color, latent-space geometry) feed the store
/// fingerprint; scoring settings (weights, d threshold) can change freely
/// against an existing store.
struct PipelineConfig {
  std::string name = "table3_2_row11";
  std::string description;
  ColorExtractionConfig color;
  ChannelWeights channels;
  ClassWeights classes;
  DistanceConfig distance;
  LatentSpaceConfig latent_space = LatentSpaceConfig::default_geometry();

  ScoringConfig scoring() const { return ScoringConfig{channels, classes, distance, latent_space}; }
  void validate() const;
};

/// Key/value text format:
///   reid-config v1
///   name = table3_2_row11
///   smoothing.length = 11
///   smoothing.before_compression = true
///   smoothing.channels = L            (any of L,a,b comma-separated, or none)
///   threshold_factor = 1
///   representative = mean             (mean | peak)
///   d_threshold = 40
///   weight.L|a|b|d|t = <w>
///   class.<region name> = <w>
/// Unlisted keys keep their defaults. Latent-space geometry has its own file.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
std::string serialize_config(const PipelineConfig& cfg);

struct Preset {
  std::string name;
  std::string description;
  PipelineConfig config;
};

inline constexpr std::string_view kDefaultPreset = "table3_2_row11";

/// Published ablation rows: table3_1_row1..7 (smoothing), table3_2_row1..11
/// (channel weights), table3_3_row1..6 (class weights).
const std::vector<Preset>& builtin_presets();

/// Built-in preset by name ("default" aliases kDefaultPreset), or a config
/// file path. Throws UnknownPreset.
PipelineConfig resolve_preset(std::string_view name_or_path);

/// Hash of the extraction-relevant settings plus label mapping and encoder version.
std::string extraction_fingerprint(const PipelineConfig& cfg, const LabelMapping& mapping,
                                   std::string_view encoder_version);

}  // namespace reid
