#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reid/image.hpp"
#include "reid/parser_class.hpp"

namespace reid {

/// Raw parser label id -> aggregated ParserClass.
///
/// The mapping covers a contiguous palette [0, palette_size). Totality over
/// that palette is validated once, when the mapping is constructed; pixel
/// lookup afterwards is a table index plus a range check.
class LabelMapping {
 public:
  /// `table[i]` is the class for raw label i. Throws ConfigError if the table
  /// is empty or longer than 256 entries.
  explicit LabelMapping(std::vector<ParserClass> table);

  /// LIP 20-label palette aggregated into the six weighted groups.
  static LabelMapping lip_default();

  /// Text format:
  ///   reid-label-mapping v1 <palette_size>
  ///   <label id> <class name>        (one line per id, '#' comments allowed)
  static LabelMapping parse(std::string_view text);
  static LabelMapping load(const std::string& path);
  std::string serialize() const;

  std::size_t palette_size() const { return table_.size(); }
  bool contains(std::uint8_t raw) const { return raw < table_.size(); }
  ParserClass operator[](std::uint8_t raw) const { return table_[raw]; }

  friend bool operator==(const LabelMapping&, const LabelMapping&) = default;

 private:
  std::vector<ParserClass> table_;
};

/// Per-pixel aggregated classes of one person crop.
struct RegionMaskSet {
  std::string image_id;
  int width = 0;
  int height = 0;
  std::vector<ParserClass> classes;  // row-major, width*height

  ParserClass at(int x, int y) const { return classes[static_cast<std::size_t>(y) * width + x]; }
  std::size_t pixel_count(ParserClass c) const;
  bool has_region(ParserClass c) const { return pixel_count(c) > 0; }
  std::array<std::size_t, kNumRegionClasses> region_counts() const;
};

struct LoadedCrop {
  RgbImage image;
  RegionMaskSet masks;
};

/// Aggregates a decoded label image. Throws DimensionMismatch / UnknownLabel.
RegionMaskSet aggregate_mask(std::string image_id, const LabelImage& labels, const LabelMapping& mapping,
                             int expected_width, int expected_height);

/// Decodes an image and its label PNG and aggregates the labels.
/// Throws DecodeError, DimensionMismatch, UnknownLabel.
LoadedCrop load_mask(std::string image_id, std::span<const std::uint8_t> image_bytes,
                     std::span<const std::uint8_t> mask_bytes, const LabelMapping& mapping);

/// RGB values of all pixels whose aggregated class equals `c`, in raster order.
/// Empty when the region is absent or `c` is Background.
std::vector<Rgb> region_pixels(const RegionMaskSet& masks, const RgbImage& image, ParserClass c);

}  // namespace reid
