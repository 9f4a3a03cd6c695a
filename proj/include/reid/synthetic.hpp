#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "reid/image.hpp"
#include "reid/parser_class.hpp"
#include "reid/texture_space.hpp"

namespace reid::synth {

/// Procedural texture archetype. Values are in [0,1]; 1 marks the pattern's
/// foreground (stripe, square or dot).
struct TexturePattern {
  TextureClass kind = TextureClass::Uniform;
  int period = 8;  // pixels per repetition
  int phase_x = 0;
  int phase_y = 0;
};

GrayImage texture_patch(const TexturePattern& pattern, int width, int height);

/// Identity-level appearance: one color per region plus the upper-clothes
/// pattern drawn in `secondary` over `colors[UpperClothes]`.
struct PersonAppearance {
  std::array<Rgb, kNumRegionClasses> colors{};
  Rgb secondary{};
  TexturePattern texture;
  bool long_hair = false;
};

PersonAppearance random_appearance(std::mt19937_64& rng);

/// A 64x128 crop and its LIP-palette label image.
struct SyntheticCrop {
  RgbImage image;
  LabelImage labels;
};

/// Renders one observation of a person: layout jitter, brightness and
/// per-pixel noise vary with `rng`, the appearance does not.
SyntheticCrop render_person(const PersonAppearance& appearance, std::mt19937_64& rng);

/// Writes `count` crops as `<images_dir>/p<id>_<n>.png` with masks in
/// `<masks_dir>/p<id>_<n>.png`; `views_per_person` crops per identity.
void write_corpus(const std::string& images_dir, const std::string& masks_dir, std::size_t count,
                  std::size_t views_per_person, std::uint64_t seed);

/// Writes a Market1501-style layout: `<root>/query`, `<root>/bounding_box_test`
/// and matching masks under `<masks>/query`, `<masks>/bounding_box_test`.
/// Each identity gets one query view and `gallery_views` gallery views from
/// other cameras, plus `distractors` unrelated gallery images (person id 0).
void write_market_dataset(const std::string& root, const std::string& masks, std::size_t identities,
                          std::size_t gallery_views, std::size_t distractors, std::uint64_t seed);

}  // namespace reid::synth
