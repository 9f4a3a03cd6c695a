#include "reid/mask_ingest.hpp"

#include <algorithm>
#include <sstream>

#include "reid/error.hpp"
#include "text_util.hpp"

namespace reid {

std::string_view parser_class_name(ParserClass c) {
  switch (c) {
    case ParserClass::UpperClothes: return "upper_clothes";
    case ParserClass::Pants: return "pants";
    case ParserClass::Hair: return "hair";
    case ParserClass::GlovesBoots: return "gloves_boots";
    case ParserClass::Legs: return "legs";
    case ParserClass::Other: return "other";
    case ParserClass::Background: return "background";
  }
  return "background";
}

std::optional<ParserClass> parse_parser_class(std::string_view name) {
  for (auto c : kRegionClasses)
    if (parser_class_name(c) == name) return c;
  if (name == "background") return ParserClass::Background;
  return std::nullopt;
}

LabelMapping::LabelMapping(std::vector<ParserClass> table) : table_(std::move(table)) {
  if (table_.empty() || table_.size() > 256)
    throw Error(ErrorCode::ConfigError, "label mapping must cover between 1 and 256 labels");
}

LabelMapping LabelMapping::lip_default() {
  using P = ParserClass;
  // LIP: 0 background, 1 hat, 2 hair, 3 glove, 4 sunglasses, 5 upper-clothes,
  // 6 dress, 7 coat, 8 socks, 9 pants, 10 jumpsuits, 11 scarf, 12 skirt,
  // 13 face, 14 left-arm, 15 right-arm, 16 left-leg, 17 right-leg,
  // 18 left-shoe, 19 right-shoe.
  return LabelMapping({
      P::Background,   P::Hair,         P::Hair,  P::GlovesBoots, P::Other,
      P::UpperClothes, P::UpperClothes, P::UpperClothes, P::GlovesBoots, P::Pants,
      P::Other,        P::Other,        P::Pants, P::Other,       P::Legs,
      P::Legs,         P::Legs,         P::Legs,  P::GlovesBoots, P::GlovesBoots,
  });
}

LabelMapping LabelMapping::parse(std::string_view text) {
  const auto lines = detail::content_lines(text);
  if (lines.empty()) throw Error(ErrorCode::ConfigError, "label mapping: empty file");
  const auto header = detail::split_ws(lines.front());
  if (header.size() != 3 || header[0] != "reid-label-mapping" || header[1] != "v1")
    throw Error(ErrorCode::ConfigError, "label mapping: expected header 'reid-label-mapping v1 <palette_size>'");
  const auto palette = detail::parse_number<int>(header[2]);
  if (!palette || *palette < 1 || *palette > 256)
    throw Error(ErrorCode::ConfigError, "label mapping: palette size must be in [1,256]");

  std::vector<std::optional<ParserClass>> table(static_cast<std::size_t>(*palette));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = detail::split_ws(lines[i]);
    const auto id = fields.size() == 2 ? detail::parse_number<int>(fields[0]) : std::nullopt;
    const auto cls = fields.size() == 2 ? parse_parser_class(fields[1]) : std::nullopt;
    if (!id || !cls) throw Error(ErrorCode::ConfigError, "label mapping: bad line '" + std::string(lines[i]) + "'");
    if (*id < 0 || *id >= *palette)
      throw Error(ErrorCode::ConfigError, "label mapping: label " + std::to_string(*id) + " outside palette");
    if (table[*id]) throw Error(ErrorCode::ConfigError, "label mapping: duplicate label " + std::to_string(*id));
    table[*id] = *cls;
  }

  std::vector<ParserClass> resolved;
  resolved.reserve(table.size());
  for (std::size_t id = 0; id < table.size(); ++id) {
    if (!table[id]) throw Error(ErrorCode::ConfigError, "label mapping: no entry for label " + std::to_string(id));
    resolved.push_back(*table[id]);
  }
  return LabelMapping(std::move(resolved));
}

LabelMapping LabelMapping::load(const std::string& path) {
  const auto bytes = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string LabelMapping::serialize() const {
  std::ostringstream out;
  out << "reid-label-mapping v1 " << table_.size() << '\n';
  for (std::size_t id = 0; id < table_.size(); ++id) out << id << ' ' << parser_class_name(table_[id]) << '\n';
  return out.str();
}

std::size_t RegionMaskSet::pixel_count(ParserClass c) const {
  return static_cast<std::size_t>(std::count(classes.begin(), classes.end(), c));
}

std::array<std::size_t, kNumRegionClasses> RegionMaskSet::region_counts() const {
  std::array<std::size_t, kNumRegionClasses> counts{};
  for (auto c : classes)
    if (c != ParserClass::Background) ++counts[index_of(c)];
  return counts;
}

RegionMaskSet aggregate_mask(std::string image_id, const LabelImage& labels, const LabelMapping& mapping,
                             int expected_width, int expected_height) {
  if (labels.width != expected_width || labels.height != expected_height) {
    std::ostringstream msg;
    msg << "mask is " << labels.width << "x" << labels.height << " but image is " << expected_width << "x"
        << expected_height;
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  RegionMaskSet out;
  out.image_id = std::move(image_id);
  out.width = labels.width;
  out.height = labels.height;
  out.classes.resize(labels.labels.size());
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const auto raw = labels.labels[i];
    if (!mapping.contains(raw))
      throw Error(ErrorCode::UnknownLabel, "raw label " + std::to_string(raw) + " is not in the label mapping");
    out.classes[i] = mapping[raw];
  }
  return out;
}

LoadedCrop load_mask(std::string image_id, std::span<const std::uint8_t> image_bytes,
                     std::span<const std::uint8_t> mask_bytes, const LabelMapping& mapping) {
  LoadedCrop crop;
  crop.image = decode_image(image_bytes);
  const auto labels = decode_label_png(mask_bytes);
  crop.masks = aggregate_mask(std::move(image_id), labels, mapping, crop.image.width, crop.image.height);
  return crop;
}

std::vector<Rgb> region_pixels(const RegionMaskSet& masks, const RgbImage& image, ParserClass c) {
  std::vector<Rgb> out;
  if (c == ParserClass::Background) return out;
  for (std::size_t i = 0; i < masks.classes.size(); ++i)
    if (masks.classes[i] == c) out.push_back(image.pixels[i]);
  return out;
}

}  // namespace reid
