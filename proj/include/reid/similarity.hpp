#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reid/color_features.hpp"
#include "reid/parser_class.hpp"
#include "reid/texture_space.hpp"

namespace reid {

/// Feature channels of the per-region weighted sum.
enum class FeatureChannel : std::uint8_t { L = 0, A = 1, B = 2, D = 3, T = 4 };
inline constexpr std::size_t kNumFeatureChannels = 5;

struct ChannelWeights {
  std::array<double, kNumFeatureChannels> w = {0.2, 0.1, 0.1, 0.3, 0.3};

  static ChannelWeights of(double l, double a, double b, double d, double t) { return {{l, a, b, d, t}}; }
  double operator[](FeatureChannel c) const { return w[static_cast<std::size_t>(c)]; }
  double& operator[](FeatureChannel c) { return w[static_cast<std::size_t>(c)]; }
  /// Non-negative, finite, summing to 1 within 1e-9. Throws ConfigError.
  void validate() const;
  friend bool operator==(const ChannelWeights&, const ChannelWeights&) = default;
};

struct ClassWeights {
  std::array<double, kNumRegionClasses> w = {8, 6, 3, 2, 1, 1};

  double operator[](ParserClass c) const { return w[index_of(c)]; }
  double& operator[](ParserClass c) { return w[index_of(c)]; }
  void validate() const;
  friend bool operator==(const ClassWeights&, const ClassWeights&) = default;
};

/// Extracted features of one person crop.
struct PersonFeatureVector {
  std::string image_id;
  std::array<std::optional<RegionColorFeature>, kNumRegionClasses> regions;
  /// Latent-space point of the upper-clothes texture.
  std::optional<TexturePoint> texture;
  /// Regions described without a color (description queries only); their
  /// L, a, b and d channels are dropped when scoring.
  std::array<bool, kNumRegionClasses> color_unknown{};

  bool has_region(ParserClass c) const { return c != ParserClass::Background && regions[index_of(c)].has_value(); }
  std::vector<ParserClass> present_regions() const;
  /// Throws InvalidArgument when texture is set without an upper-clothes region.
  void validate() const;
  friend bool operator==(const PersonFeatureVector&, const PersonFeatureVector&) = default;
};

/// Per-channel similarities of one region pair plus which channels carry evidence.
struct ChannelSimilarities {
  std::array<double, kNumFeatureChannels> s{};
  std::array<bool, kNumFeatureChannels> usable = {true, true, true, true, true};
};

struct ScoringConfig {
  ChannelWeights channels;
  ClassWeights classes;
  DistanceConfig distance;
  LatentSpaceConfig latent_space = LatentSpaceConfig::default_geometry();
};

/// Channel weights with unusable channels removed and the rest scaled by
/// 1 / (1 - dropped weight), preserving their ratios. All zero when nothing
/// with positive weight remains.
ChannelWeights rescaled_weights(const ChannelWeights& w, const std::array<bool, kNumFeatureChannels>& usable);

/// Weighted channel sum with missing-evidence rescaling. In [0,1] for inputs in [0,1].
double region_similarity(const ChannelSimilarities& sims, const ChannelWeights& w);

/// Computes the five channel similarities of a region pair. Texture is only
/// usable when both points are given.
ChannelSimilarities channel_similarities(const RegionColorFeature& f1, const RegionColorFeature& f2,
                                         const std::optional<TexturePoint>& t1,
                                         const std::optional<TexturePoint>& t2, const ScoringConfig& cfg);

/// S_c of one parser class; throws RegionAbsent unless both vectors contain it.
double region_similarity(const PersonFeatureVector& q, const PersonFeatureVector& g, ParserClass region,
                         const ScoringConfig& cfg);

struct RegionScore {
  ParserClass region = ParserClass::Other;
  double class_weight = 0.0;
  double similarity = 0.0;  // S_c
  double contribution = 0.0;  // class_weight * S_c
};

struct RankedResult {
  std::string image_id;
  double score = 0.0;  // S_tot
  std::vector<RegionScore> regions;  // used regions, in class order
};

/// Sum of class weights over regions present in both vectors (the best score `g` could reach).
double max_achievable_score(const PersonFeatureVector& q, const PersonFeatureVector& g, const ClassWeights& cw);

/// Weighted sum over regions present in both. Throws NoCommonRegions.
RankedResult total_similarity(const PersonFeatureVector& q, const PersonFeatureVector& g, const ScoringConfig& cfg);

/// As total_similarity, but a pair without common regions scores 0.
RankedResult score_pair(const PersonFeatureVector& q, const PersonFeatureVector& g, const ScoringConfig& cfg);

/// Strict total order of results: score descending, then image_id ascending.
bool ranks_before(const RankedResult& a, const RankedResult& b);

/// Top-k gallery entries. Throws EmptyGallery, InvalidArgument (top_k == 0).
std::vector<RankedResult> rank_gallery(const PersonFeatureVector& q, std::span<const PersonFeatureVector> gallery,
                                       const ScoringConfig& cfg, std::size_t top_k);

}  // namespace reid
