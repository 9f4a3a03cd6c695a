#include "reid/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "reid/error.hpp"

namespace reid {

void ChannelWeights::validate() const {
  double sum = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::ConfigError, "channel weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::ConfigError, "channel weights must sum to 1 (got " + std::to_string(sum) + ")");
}

void ClassWeights::validate() const {
  for (double v : w)
    if (!std::isfinite(v) || v < 0.0) throw Error(ErrorCode::ConfigError, "class weights must be non-negative");
}

std::vector<ParserClass> PersonFeatureVector::present_regions() const {
  std::vector<ParserClass> out;
  for (auto c : kRegionClasses)
    if (has_region(c)) out.push_back(c);
  return out;
}

void PersonFeatureVector::validate() const {
  if (texture && !has_region(ParserClass::UpperClothes))
    throw Error(ErrorCode::InvalidArgument, image_id + ": texture present without an upper-clothes region");
}

ChannelWeights rescaled_weights(const ChannelWeights& w, const std::array<bool, kNumFeatureChannels>& usable) {
  double dropped = 0.0;
  bool any_dropped = false;
  for (std::size_t i = 0; i < kNumFeatureChannels; ++i)
    if (!usable[i]) {
      dropped += w.w[i];
      any_dropped = true;
    }
  if (!any_dropped) return w;

  ChannelWeights out;
  const double remaining = 1.0 - dropped;
  for (std::size_t i = 0; i < kNumFeatureChannels; ++i)
    out.w[i] = (usable[i] && remaining > 1e-12) ? w.w[i] / remaining : 0.0;
  return out;
}

double region_similarity(const ChannelSimilarities& sims, const ChannelWeights& w) {
  const ChannelWeights eff = rescaled_weights(w, sims.usable);
  double total = 0.0;
  for (std::size_t i = 0; i < kNumFeatureChannels; ++i)
    if (sims.usable[i]) total += eff.w[i] * sims.s[i];
  return total;
}

ChannelSimilarities channel_similarities(const RegionColorFeature& f1, const RegionColorFeature& f2,
                                         const std::optional<TexturePoint>& t1,
                                         const std::optional<TexturePoint>& t2, const ScoringConfig& cfg) {
  ChannelSimilarities out;
  for (LabChannel ch : kLabChannels) {
    const auto i = static_cast<std::size_t>(ch);
    out.s[i] = channel_similarity(f1[ch], f2[ch]);
    out.usable[i] = channel_usable(f1[ch], f2[ch]);
  }
  out.s[3] = distance_similarity(f1.representative, f2.representative, cfg.distance);
  if (t1 && t2) {
    out.s[4] = texture_similarity(*t1, *t2, cfg.latent_space);
  } else {
    out.usable[4] = false;
  }
  return out;
}

namespace {

std::optional<TexturePoint> texture_for(const PersonFeatureVector& v, ParserClass region) {
  return region == ParserClass::UpperClothes ? v.texture : std::nullopt;
}

}  // namespace

double region_similarity(const PersonFeatureVector& q, const PersonFeatureVector& g, ParserClass region,
                         const ScoringConfig& cfg) {
  if (!q.has_region(region) || !g.has_region(region)) {
    throw Error(ErrorCode::RegionAbsent,
                std::string(parser_class_name(region)) + " is not present in both " + q.image_id + " and " + g.image_id);
  }
  auto sims = channel_similarities(*q.regions[index_of(region)], *g.regions[index_of(region)],
                                         texture_for(q, region), texture_for(g, region), cfg);
  if (q.color_unknown[index_of(region)] || g.color_unknown[index_of(region)])
    for (std::size_t i = 0; i < 4; ++i) sims.usable[i] = false;
  return region_similarity(sims, cfg.channels);
}

double max_achievable_score(const PersonFeatureVector& q, const PersonFeatureVector& g, const ClassWeights& cw) {
  double total = 0.0;
  for (auto c : kRegionClasses)
    if (q.has_region(c) && g.has_region(c)) total += cw[c];
  return total;
}

RankedResult score_pair(const PersonFeatureVector& q, const PersonFeatureVector& g, const ScoringConfig& cfg) {
  RankedResult result;
  result.image_id = g.image_id;
  for (auto c : kRegionClasses) {
    if (!q.has_region(c) || !g.has_region(c)) continue;
    RegionScore rs;
    rs.region = c;
    rs.class_weight = cfg.classes[c];
    rs.similarity = region_similarity(q, g, c, cfg);
    rs.contribution = rs.class_weight * rs.similarity;
    result.score += rs.contribution;
    result.regions.push_back(rs);
  }
  return result;
}

RankedResult total_similarity(const PersonFeatureVector& q, const PersonFeatureVector& g, const ScoringConfig& cfg) {
  RankedResult result = score_pair(q, g, cfg);
  if (result.regions.empty())
    throw Error(ErrorCode::NoCommonRegions, q.image_id + " and " + g.image_id + " share no parser regions");
  return result;
}

bool ranks_before(const RankedResult& a, const RankedResult& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.image_id < b.image_id;
}

std::vector<RankedResult> rank_gallery(const PersonFeatureVector& q, std::span<const PersonFeatureVector> gallery,
                                       const ScoringConfig& cfg, std::size_t top_k) {
  if (top_k == 0) throw Error(ErrorCode::InvalidArgument, "top_k must be at least 1");
  if (gallery.empty()) throw Error(ErrorCode::EmptyGallery, "cannot rank an empty gallery");

  std::vector<RankedResult> scored(gallery.size());
  detail::parallel_for(gallery.size(), [&](std::size_t i) { scored[i] = score_pair(q, gallery[i], cfg); });

  const std::size_t k = std::min(top_k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(), ranks_before);
  scored.resize(k);
  return scored;
}

}  // namespace reid
