#include "reid/query_builder.hpp"

#include <algorithm>
#include <cmath>

#include "reid/error.hpp"
#include "reid/image.hpp"
#include "text_util.hpp"

namespace reid {
namespace {

void check_gamut(const std::string& name, const Lab& lab) {
  if (!(lab.L >= 0.0 && lab.L <= 100.0 && lab.a >= -128.0 && lab.a <= 127.0 && lab.b >= -128.0 && lab.b <= 127.0))
    throw Error(ErrorCode::ConfigError, "color '" + name + "' is outside the Lab gamut");
}

}  // namespace

void DescriptionQuery::validate() const {
  if (regions.empty()) throw Error(ErrorCode::EmptyDescription, "description has no region terms");
  std::array<bool, kNumRegionClasses> seen{};
  for (const auto& term : regions) {
    if (term.region == ParserClass::Background)
      throw Error(ErrorCode::InvalidDescription, "background cannot be described");
    const auto name = std::string(parser_class_name(term.region));
    if (seen[index_of(term.region)]) throw Error(ErrorCode::InvalidDescription, "region " + name + " described twice");
    seen[index_of(term.region)] = true;
    if (term.texture && term.region != ParserClass::UpperClothes)
      throw Error(ErrorCode::InvalidDescription, "texture can only be described for upper_clothes, not " + name);
    if (!term.color && !term.texture)
      throw Error(ErrorCode::InvalidDescription, "region " + name + " has neither a color nor a texture");
    if (term.color)
      if (const auto* lab = std::get_if<Lab>(&*term.color)) {
        if (!(lab->L >= 0.0 && lab->L <= 100.0 && lab->a >= -128.0 && lab->a <= 127.0 && lab->b >= -128.0 &&
              lab->b <= 127.0))
          throw Error(ErrorCode::InvalidDescription, "explicit Lab color for " + name + " is outside the gamut");
      }
  }
  if (channel_weights) {
    try {
      channel_weights->validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidDescription, e.what());
    }
  }
}

ColorNameTable ColorNameTable::builtin() {
  // Lab of the CSS sRGB definitions (D65).
  ColorNameTable t;
  t.add("black", {{0.0, 0.0, 0.0}});          // (0,0,0)
  t.add("white", {{100.0, 0.0, 0.0}});        // (255,255,255)
  t.add("gray", {{53.59, 0.0, 0.0}});         // (128,128,128)
  t.add("red", {{53.24, 80.09, 67.20}});      // (255,0,0)
  t.add("orange", {{74.94, 23.93, 78.95}});   // (255,165,0)
  t.add("yellow", {{97.14, -21.55, 94.48}});  // (255,255,0)
  t.add("green", {{46.23, -51.70, 49.90}});   // (0,128,0)
  t.add("blue", {{32.30, 79.19, -107.86}});   // (0,0,255)
  t.add("navy", {{12.97, 47.50, -64.70}});    // (0,0,128)
  t.add("purple", {{29.78, 58.93, -36.48}});  // (128,0,128)
  t.add("pink", {{83.59, 24.14, 3.33}});      // (255,192,203)
  t.add("brown", {{37.53, 49.69, 30.54}});    // (165,42,42)
  t.add("beige", {{95.95, -4.19, 12.05}});    // (245,245,220)
  t.add("khaki", {{90.33, -9.01, 44.98}});    // (240,230,140)
  t.add("teal", {{48.25, -28.85, -8.47}});    // (0,128,128)
  t.add("maroon", {{25.54, 48.05, 38.06}});   // (128,0,0)
  return t;
}

void ColorNameTable::add(std::string name, NamedColor color) {
  check_gamut(name, color.lab);
  if (color.spread < 0) throw Error(ErrorCode::ConfigError, "color '" + name + "' has a negative spread");
  entries_[std::move(name)] = color;
}

std::optional<NamedColor> ColorNameTable::find(std::string_view name) const {
  const auto it = entries_.find(name);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

ColorNameTable ColorNameTable::parse(std::string_view text, ColorNameTable base) {
  const auto lines = detail::content_lines(text);
  if (lines.empty() || detail::split_ws(lines.front()) != std::vector<std::string_view>{"reid-colors", "v1"})
    throw Error(ErrorCode::ConfigError, "color table: expected header 'reid-colors v1'");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = detail::split_ws(lines[i]);
    if (f.size() != 4 && f.size() != 5)
      throw Error(ErrorCode::ConfigError, "color table: bad line '" + std::string(lines[i]) + "'");
    const auto L = detail::parse_number<double>(f[1]);
    const auto a = detail::parse_number<double>(f[2]);
    const auto b = detail::parse_number<double>(f[3]);
    const auto spread = f.size() == 5 ? detail::parse_number<int>(f[4]) : std::optional<int>(2);
    if (!L || !a || !b || !spread)
      throw Error(ErrorCode::ConfigError, "color table: bad numbers in '" + std::string(lines[i]) + "'");
    base.add(std::string(f[0]), NamedColor{{*L, *a, *b}, *spread});
  }
  return base;
}

ColorNameTable ColorNameTable::load(const std::string& path, ColorNameTable base) {
  const auto bytes = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), std::move(base));
}

int lab_bin64_index(double value, LabChannel channel) {
  const double scaled = channel == LabChannel::L ? value * 255.0 / 100.0 : value + 128.0;
  return std::clamp(static_cast<int>(std::lround(scaled / 4.0)), 0, 63);
}

RegionColorFeature color_term_to_feature(const ColorTerm& term, const ColorNameTable& table, int default_spread) {
  NamedColor color{{}, default_spread};
  if (const auto* name = std::get_if<std::string>(&term)) {
    const auto found = table.find(*name);
    if (!found) throw Error(ErrorCode::UnknownColorName, "unknown color name '" + *name + "'");
    color = *found;
  } else {
    color.lab = std::get<Lab>(term);
  }

  RegionColorFeature f;
  f.representative = color.lab;
  for (LabChannel ch : kLabChannels) {
    const int center = lab_bin64_index(color.lab[ch], ch);
    auto& h = f.histograms[static_cast<std::size_t>(ch)];
    h.channel = ch;
    for (int k = std::max(0, center - color.spread); k <= std::min(63, center + color.spread); ++k)
      h.bits |= std::uint64_t{1} << k;
  }
  return f;
}

TexturePoint texture_term_to_point(TextureClass texture, const LatentSpaceConfig& ls) { return ls.center(texture); }

BuiltQuery build_query(const DescriptionQuery& dq, const LatentSpaceConfig& ls, const ColorNameTable& table,
                       const ChannelWeights& base_channels, const ClassWeights& base_classes) {
  dq.validate();
  BuiltQuery out;
  out.features.image_id = "<description>";
  bool any_color = false;
  for (const auto& term : dq.regions) {
    const auto idx = index_of(term.region);
    if (term.color) {
      out.features.regions[idx] = color_term_to_feature(*term.color, table);
      any_color = true;
    } else {
      // Texture-only term: empty color placeholder, excluded from scoring.
      out.features.regions[idx] = RegionColorFeature{};
      out.features.color_unknown[idx] = true;
    }
    if (term.texture) out.features.texture = texture_term_to_point(*term.texture, ls);
    out.max_score += base_classes[term.region];
  }

  if (dq.channel_weights) {
    out.channels = *dq.channel_weights;
  } else if (!any_color) {
    out.channels = ChannelWeights::of(0, 0, 0, 0, 1);
  } else {
    out.channels = base_channels;
  }
  out.classes = base_classes;
  return out;
}

}  // namespace reid
