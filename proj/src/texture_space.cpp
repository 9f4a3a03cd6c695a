#include "reid/texture_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "reid/error.hpp"
#include "reid/image.hpp"
#include "text_util.hpp"

namespace reid {

std::string_view texture_class_name(TextureClass c) {
  switch (c) {
    case TextureClass::Uniform: return "uniform";
    case TextureClass::HorizontalLines: return "horizontal_lines";
    case TextureClass::VerticalLines: return "vertical_lines";
    case TextureClass::Checkered: return "checkered";
    case TextureClass::Dots: return "dots";
  }
  return "uniform";
}

std::optional<TextureClass> parse_texture_class(std::string_view name) {
  for (auto c : kTextureClasses)
    if (texture_class_name(c) == name) return c;
  return std::nullopt;
}

double distance(const TexturePoint& p, const TexturePoint& q) { return std::hypot(p.x - q.x, p.y - q.y); }

LatentSpaceConfig LatentSpaceConfig::default_geometry() {
  LatentSpaceConfig cfg;
  auto on_circle = [](double degrees) {
    const double rad = degrees * std::numbers::pi / 180.0;
    return TexturePoint{std::cos(rad), std::sin(rad)};
  };
  cfg.centers[static_cast<std::size_t>(TextureClass::Uniform)] = {0.0, 0.0};
  cfg.centers[static_cast<std::size_t>(TextureClass::HorizontalLines)] = on_circle(45.0);
  cfg.centers[static_cast<std::size_t>(TextureClass::VerticalLines)] = on_circle(135.0);
  cfg.centers[static_cast<std::size_t>(TextureClass::Checkered)] = on_circle(225.0);
  cfg.centers[static_cast<std::size_t>(TextureClass::Dots)] = on_circle(315.0);
  cfg.kernel_sigma = cfg.min_center_distance() / 2.0;
  return cfg;
}

double LatentSpaceConfig::min_center_distance() const {
  double best = INFINITY;
  for (std::size_t i = 0; i < centers.size(); ++i)
    for (std::size_t j = i + 1; j < centers.size(); ++j) best = std::min(best, distance(centers[i], centers[j]));
  return best;
}

void LatentSpaceConfig::validate() const {
  for (const auto& c : centers)
    if (!std::isfinite(c.x) || !std::isfinite(c.y))
      throw Error(ErrorCode::ConfigError, "latent space: non-finite center coordinate");
  if (!(min_center_distance() > 0.0)) throw Error(ErrorCode::ConfigError, "latent space: coincident centers");
  if (!(kernel_sigma > 0.0) || !std::isfinite(kernel_sigma))
    throw Error(ErrorCode::ConfigError, "latent space: kernel_sigma must be positive");
}

LatentSpaceConfig LatentSpaceConfig::parse(std::string_view text) {
  const auto lines = detail::content_lines(text);
  if (lines.empty() || detail::split_ws(lines.front()) != std::vector<std::string_view>{"reid-latent-space", "v1"})
    throw Error(ErrorCode::ConfigError, "latent space: expected header 'reid-latent-space v1'");

  LatentSpaceConfig cfg;
  std::array<bool, kNumTextureClasses> seen{};
  bool have_sigma = false;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = detail::split_ws(lines[i]);
    if (f.size() == 2 && f[0] == "kernel_sigma") {
      const auto v = detail::parse_number<double>(f[1]);
      if (!v) throw Error(ErrorCode::ConfigError, "latent space: bad kernel_sigma");
      cfg.kernel_sigma = *v;
      have_sigma = true;
      continue;
    }
    const auto cls = f.size() == 3 ? parse_texture_class(f[0]) : std::nullopt;
    const auto x = f.size() == 3 ? detail::parse_number<double>(f[1]) : std::nullopt;
    const auto y = f.size() == 3 ? detail::parse_number<double>(f[2]) : std::nullopt;
    if (!cls || !x || !y) throw Error(ErrorCode::ConfigError, "latent space: bad line '" + std::string(lines[i]) + "'");
    const auto idx = static_cast<std::size_t>(*cls);
    if (seen[idx]) throw Error(ErrorCode::ConfigError, "latent space: duplicate center " + std::string(f[0]));
    seen[idx] = true;
    cfg.centers[idx] = {*x, *y};
  }
  for (auto c : kTextureClasses)
    if (!seen[static_cast<std::size_t>(c)])
      throw Error(ErrorCode::ConfigError, "latent space: missing center " + std::string(texture_class_name(c)));
  if (!have_sigma) cfg.kernel_sigma = cfg.min_center_distance() / 2.0;
  cfg.validate();
  return cfg;
}

LatentSpaceConfig LatentSpaceConfig::load(const std::string& path) {
  const auto bytes = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string LatentSpaceConfig::serialize() const {
  std::ostringstream out;
  out.precision(17);
  out << "reid-latent-space v1\n";
  out << "kernel_sigma " << kernel_sigma << '\n';
  for (auto c : kTextureClasses) out << texture_class_name(c) << ' ' << center(c).x << ' ' << center(c).y << '\n';
  return out.str();
}

ClassSimilarityVector class_similarity_vector(const TexturePoint& p, const LatentSpaceConfig& cfg) {
  ClassSimilarityVector v{};
  const double denom = 2.0 * cfg.kernel_sigma * cfg.kernel_sigma;
  for (std::size_t k = 0; k < kNumTextureClasses; ++k) {
    const double dx = p.x - cfg.centers[k].x;
    const double dy = p.y - cfg.centers[k].y;
    v[k] = std::exp(-(dx * dx + dy * dy) / denom);
  }
  return v;
}

double texture_similarity(const TexturePoint& p1, const TexturePoint& p2, const LatentSpaceConfig& cfg) {
  if (p1 == p2) return 1.0;
  const auto v1 = class_similarity_vector(p1, cfg);
  const auto v2 = class_similarity_vector(p2, cfg);
  double dot = 0.0, n1 = 0.0, n2 = 0.0;
  for (std::size_t k = 0; k < kNumTextureClasses; ++k) {
    dot += v1[k] * v2[k];
    n1 += v1[k] * v1[k];
    n2 += v2[k] * v2[k];
  }
  // A point far from every center underflows to the zero vector.
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), 0.0, 1.0);
}

TextureClass nearest_class(const TexturePoint& p, const LatentSpaceConfig& cfg) {
  TextureClass best = TextureClass::Uniform;
  double best_dist = INFINITY;
  for (auto c : kTextureClasses) {
    const double d = distance(p, cfg.center(c));
    if (d < best_dist) {
      best_dist = d;
      best = c;
    }
  }
  return best;
}

}  // namespace reid
