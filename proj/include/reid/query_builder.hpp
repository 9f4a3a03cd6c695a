#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "reid/color_features.hpp"
#include "reid/similarity.hpp"
#include "reid/texture_space.hpp"

namespace reid {

/// A color named in the table, or an explicit Lab triple.
using ColorTerm = std::variant<std::string, Lab>;

struct RegionTerm {
  ParserClass region = ParserClass::UpperClothes;
  std::optional<ColorTerm> color;
  std::optional<TextureClass> texture;  // upper clothes only
};

/// Structured description of a person, e.g. "red upper clothes and black pants".
struct DescriptionQuery {
  std::vector<RegionTerm> regions;
  std::optional<ChannelWeights> channel_weights;

  /// Throws EmptyDescription (no terms) or InvalidDescription (texture off
  /// upper clothes, duplicate or background region, term without color or texture).
  void validate() const;
};

struct NamedColor {
  Lab lab;
  int spread = 2;  // half-width of the bit window, in 64-bin units
};

class ColorNameTable {
 public:
  /// Sixteen basic clothing colors.
  static ColorNameTable builtin();

  /// Text format:
  ///   reid-colors v1
  ///   <name> <L> <a> <b> [spread]
  /// Entries extend (or override) `base`.
  static ColorNameTable parse(std::string_view text, ColorNameTable base = {});
  static ColorNameTable load(const std::string& path, ColorNameTable base = builtin());

  void add(std::string name, NamedColor color);
  std::optional<NamedColor> find(std::string_view name) const;
  const std::map<std::string, NamedColor, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, NamedColor, std::less<>> entries_;
};

/// 64-bin index of a Lab coordinate: round(scaled / 4) clamped to [0,63].
int lab_bin64_index(double value, LabChannel channel);

/// Representative color = the Lab triple; each channel sets bits within
/// +-spread of the triple's 64-bin index. Throws UnknownColorName.
RegionColorFeature color_term_to_feature(const ColorTerm& term, const ColorNameTable& table, int default_spread = 2);

TexturePoint texture_term_to_point(TextureClass texture, const LatentSpaceConfig& ls);

struct BuiltQuery {
  PersonFeatureVector features;
  ChannelWeights channels;
  ClassWeights classes;
  double max_score = 0.0;  // sum of class weights of the described regions
};

/// Weight rules: an explicit override wins; a texture-only description uses
/// the texture channel alone; otherwise `base_channels`. Class weights are
/// `base_classes`; undescribed regions never take part.
BuiltQuery build_query(const DescriptionQuery& dq, const LatentSpaceConfig& ls, const ColorNameTable& table,
                       const ChannelWeights& base_channels = {}, const ClassWeights& base_classes = {});

}  // namespace reid
