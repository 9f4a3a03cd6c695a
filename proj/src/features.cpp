#include "reid/features.hpp"

#include "reid/error.hpp"

namespace reid {

PersonFeatureVector extract_features(const LoadedCrop& crop, const PipelineConfig& cfg, const EncoderModel& encoder) {
  PersonFeatureVector v;
  v.image_id = crop.masks.image_id;

  std::array<std::vector<Rgb>, kNumRegionClasses> pixels;
  for (std::size_t i = 0; i < crop.masks.classes.size(); ++i) {
    const auto c = crop.masks.classes[i];
    if (c != ParserClass::Background) pixels[index_of(c)].push_back(crop.image.pixels[i]);
  }
  for (auto c : kRegionClasses) {
    const auto& px = pixels[index_of(c)];
    if (!px.empty()) v.regions[index_of(c)] = extract_region_color(px, cfg.color);
  }

  if (v.has_region(ParserClass::UpperClothes)) {
    const GrayImage patch = extract_texture_patch(crop.image, crop.masks, ParserClass::UpperClothes);
    try {
      v.texture = encode_texture(patch, encoder, cfg.latent_space);
    } catch (const Error& e) {
      // Slivers of upper clothes carry no usable texture; the region is still
      // scored on color with the texture weight redistributed.
      if (e.code() != ErrorCode::PatchTooSmall) throw;
    }
  }
  return v;
}

}  // namespace reid
