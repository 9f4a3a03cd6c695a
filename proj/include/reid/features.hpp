#pragma once

#include "reid/config.hpp"
#include "reid/mask_ingest.hpp"
#include "reid/similarity.hpp"
#include "reid/texture_encoder.hpp"

namespace reid {

/// Color features for every present region and, when the upper-clothes patch
/// is at least 8x8, its latent-space texture point.
PersonFeatureVector extract_features(const LoadedCrop& crop, const PipelineConfig& cfg, const EncoderModel& encoder);

}  // namespace reid
