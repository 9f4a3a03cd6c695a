#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace reid {

enum class TextureClass : std::uint8_t {
  Uniform = 0,
  HorizontalLines = 1,
  VerticalLines = 2,
  Checkered = 3,
  Dots = 4,
};

inline constexpr std::size_t kNumTextureClasses = 5;
inline constexpr std::array<TextureClass, kNumTextureClasses> kTextureClasses = {
    TextureClass::Uniform, TextureClass::HorizontalLines, TextureClass::VerticalLines,
    TextureClass::Checkered, TextureClass::Dots};

std::string_view texture_class_name(TextureClass c);
std::optional<TextureClass> parse_texture_class(std::string_view name);

struct TexturePoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const TexturePoint&, const TexturePoint&) = default;
};

double distance(const TexturePoint& p, const TexturePoint& q);

/// Geometry of the pre-configured 2D latent space.
struct LatentSpaceConfig {
  std::array<TexturePoint, kNumTextureClasses> centers;
  double kernel_sigma = 0.5;

  const TexturePoint& center(TextureClass c) const { return centers[static_cast<std::size_t>(c)]; }

  /// Uniform at the origin; the four structured classes on a square of
  /// circumradius 1 at 45/135/225/315 degrees; sigma = half the minimum
  /// inter-center distance.
  static LatentSpaceConfig default_geometry();

  /// Text format:
  ///   reid-latent-space v1
  ///   kernel_sigma <value>
  ///   <class name> <x> <y>     (one per class)
  static LatentSpaceConfig parse(std::string_view text);
  static LatentSpaceConfig load(const std::string& path);
  std::string serialize() const;

  double min_center_distance() const;
  /// Throws ConfigError on non-finite values, coincident centers or sigma <= 0.
  void validate() const;

  friend bool operator==(const LatentSpaceConfig&, const LatentSpaceConfig&) = default;
};

using ClassSimilarityVector = std::array<double, kNumTextureClasses>;

/// v_k = exp(-d_k^2 / (2 sigma^2)), unnormalized.
ClassSimilarityVector class_similarity_vector(const TexturePoint& p, const LatentSpaceConfig& cfg);

/// Cosine of the two class-similarity vectors; in (0,1].
double texture_similarity(const TexturePoint& p1, const TexturePoint& p2, const LatentSpaceConfig& cfg);

TextureClass nearest_class(const TexturePoint& p, const LatentSpaceConfig& cfg);

}  // namespace reid
