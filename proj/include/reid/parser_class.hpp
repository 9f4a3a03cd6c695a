#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace reid {

/// Weighted region groups used for scoring. Background is never scored.
enum class ParserClass : std::uint8_t {
  UpperClothes = 0,
  Pants = 1,
  Hair = 2,
  GlovesBoots = 3,
  Legs = 4,
  Other = 5,
  Background = 6,
};

inline constexpr std::size_t kNumRegionClasses = 6;

inline constexpr std::array<ParserClass, kNumRegionClasses> kRegionClasses = {
    ParserClass::UpperClothes, ParserClass::Pants, ParserClass::Hair,
    ParserClass::GlovesBoots,  ParserClass::Legs,  ParserClass::Other,
};

constexpr std::size_t index_of(ParserClass c) { return static_cast<std::size_t>(c); }

/// snake_case name used in config files and the JSON API.
std::string_view parser_class_name(ParserClass c);
std::optional<ParserClass> parse_parser_class(std::string_view name);

}  // namespace reid
