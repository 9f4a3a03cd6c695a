#include "reid/color_features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "reid/error.hpp"

namespace reid {
namespace {

// sRGB primaries -> XYZ, D65.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};

// Reference white as the image of linear (1,1,1), so sRGB white lands exactly
// on L=100, a=b=0.
constexpr double kWhite[3] = {
    kRgbToXyz[0][0] + kRgbToXyz[0][1] + kRgbToXyz[0][2],
    kRgbToXyz[1][0] + kRgbToXyz[1][1] + kRgbToXyz[1][2],
    kRgbToXyz[2][0] + kRgbToXyz[2][1] + kRgbToXyz[2][2],
};

struct LinearLut {
  std::array<double, 256> values{};
  LinearLut() {
    for (int i = 0; i < 256; ++i) {
      const double c = i / 255.0;
      values[i] = c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
    }
  }
};

const LinearLut& linear_lut() {
  static const LinearLut lut;
  return lut;
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t) : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

template <std::size_t N>
std::array<double, N> smooth_bins(const std::array<double, N>& in, int length) {
  std::array<double, N> out{};
  uniform_filter(in, out, length);
  return out;
}

}  // namespace

Lab rgb_to_lab(Rgb rgb) {
  const auto& lut = linear_lut().values;
  const double lin[3] = {lut[rgb.r], lut[rgb.g], lut[rgb.b]};
  double xyz[3];
  for (int i = 0; i < 3; ++i) {
    xyz[i] = (kRgbToXyz[i][0] * lin[0] + kRgbToXyz[i][1] * lin[1] + kRgbToXyz[i][2] * lin[2]) / kWhite[i];
  }
  const double fx = lab_f(xyz[0]);
  const double fy = lab_f(xyz[1]);
  const double fz = lab_f(xyz[2]);
  return Lab{116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

int lab_bin_index(double value, LabChannel channel) {
  const double scaled = channel == LabChannel::L ? value * 255.0 / 100.0 : value + 128.0;
  // The epsilon keeps exact bin edges (e.g. L=100 -> 255) from flooring one
  // bin low after rounding in the Lab transform.
  const int bin = static_cast<int>(std::floor(scaled + 1e-9));
  return std::clamp(bin, 0, 255);
}

double lab_value_of_bin(int bin, LabChannel channel) {
  return channel == LabChannel::L ? bin * 100.0 / 255.0 : bin - 128.0;
}

void SmoothingConfig::validate() const {
  if (length < 1 || length % 2 == 0)
    throw Error(ErrorCode::ConfigError, "smoothing length must be an odd positive integer");
}

void ColorExtractionConfig::validate() const {
  smoothing.validate();
  if (!(threshold_factor > 0.0) || !std::isfinite(threshold_factor))
    throw Error(ErrorCode::ConfigError, "threshold factor must be positive");
}

void DistanceConfig::validate() const {
  if (!(d_threshold > 0.0) || !std::isfinite(d_threshold))
    throw Error(ErrorCode::ConfigError, "d_threshold must be positive");
}

ChannelHistogram256 build_histogram(std::span<const Lab> pixels, LabChannel channel) {
  if (pixels.empty()) throw Error(ErrorCode::EmptyRegion, "cannot build a histogram of an empty region");
  ChannelHistogram256 h;
  h.channel = channel;
  for (const Lab& p : pixels) h.bins[lab_bin_index(p[channel], channel)] += 1.0;
  return h;
}

ChannelHistogram256 build_histogram(std::span<const Rgb> pixels, LabChannel channel) {
  std::vector<Lab> lab(pixels.size());
  std::transform(pixels.begin(), pixels.end(), lab.begin(), rgb_to_lab);
  return build_histogram(std::span<const Lab>(lab), channel);
}

void uniform_filter(std::span<const double> in, std::span<double> out, int length) {
  const int n = static_cast<int>(in.size());
  const int half = length / 2;
  if (n == 0) return;
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = i - half; j <= i + half; ++j) sum += in[std::clamp(j, 0, n - 1)];
    out[i] = sum / length;
  }
}

ChannelHistogram256 smooth_histogram(const ChannelHistogram256& h, const SmoothingConfig& cfg) {
  cfg.validate();
  if (cfg.length == 1 || !cfg.applies_to(h.channel)) return h;
  return ChannelHistogram256{h.channel, smooth_bins(h.bins, cfg.length)};
}

Histogram64 smooth_histogram(const Histogram64& h, const SmoothingConfig& cfg) {
  cfg.validate();
  if (cfg.length == 1 || !cfg.applies_to(h.channel)) return h;
  return Histogram64{h.channel, smooth_bins(h.bins, cfg.length)};
}

Histogram64 compress_histogram(const ChannelHistogram256& h) {
  Histogram64 out;
  out.channel = h.channel;
  for (int k = 0; k < 64; ++k) out.bins[k] = h.bins[4 * k] + h.bins[4 * k + 1] + h.bins[4 * k + 2] + h.bins[4 * k + 3];
  return out;
}

BinaryHistogram64 binarize(const Histogram64& h, double threshold_factor) {
  const double mean = std::accumulate(h.bins.begin(), h.bins.end(), 0.0) / 64.0;
  const double threshold = threshold_factor * mean;
  BinaryHistogram64 out{h.channel, 0};
  for (int k = 0; k < 64; ++k)
    if (h.bins[k] > threshold) out.bits |= std::uint64_t{1} << k;
  return out;
}

double channel_similarity(const BinaryHistogram64& b1, const BinaryHistogram64& b2) {
  const int uni = std::popcount(b1.bits | b2.bits);
  if (uni == 0) return 0.0;
  return static_cast<double>(std::popcount(b1.bits & b2.bits)) / uni;
}

Lab clamp_to_gamut(Lab c) {
  return Lab{std::clamp(c.L, 0.0, 100.0), std::clamp(c.a, -128.0, 127.0), std::clamp(c.b, -128.0, 127.0)};
}

Lab representative_color(std::span<const Rgb> pixels) {
  if (pixels.empty()) throw Error(ErrorCode::EmptyRegion, "representative color of an empty region");
  double sum[3] = {0, 0, 0};
  for (const Rgb& p : pixels) {
    const Lab lab = rgb_to_lab(p);
    sum[0] += lab.L;
    sum[1] += lab.a;
    sum[2] += lab.b;
  }
  const double n = static_cast<double>(pixels.size());
  return clamp_to_gamut(Lab{sum[0] / n, sum[1] / n, sum[2] / n});
}

double distance_similarity(const Lab& c1, const Lab& c2, const DistanceConfig& cfg) {
  const double dist = std::hypot(c1.L - c2.L, c1.a - c2.a, c1.b - c2.b);
  return std::max(0.0, 1.0 - dist / cfg.d_threshold);
}

RegionColorFeature extract_region_color(std::span<const Rgb> pixels, const ColorExtractionConfig& cfg) {
  if (pixels.empty()) throw Error(ErrorCode::EmptyRegion, "cannot extract color features of an empty region");
  std::vector<Lab> lab(pixels.size());
  std::transform(pixels.begin(), pixels.end(), lab.begin(), rgb_to_lab);

  RegionColorFeature feature;
  Lab peak;
  for (LabChannel ch : kLabChannels) {
    const bool smooth = cfg.smoothing.applies_to(ch);
    ChannelHistogram256 h256 = build_histogram(std::span<const Lab>(lab), ch);
    if (smooth && cfg.smoothing.before_compression) h256 = smooth_histogram(h256, cfg.smoothing);
    Histogram64 h64 = compress_histogram(h256);
    if (smooth && !cfg.smoothing.before_compression) h64 = smooth_histogram(h64, cfg.smoothing);
    feature.histograms[static_cast<std::size_t>(ch)] = binarize(h64, cfg.threshold_factor);

    if (cfg.representative == RepresentativeMode::HistogramPeak) {
      const ChannelHistogram256 basis = smooth_histogram(build_histogram(std::span<const Lab>(lab), ch),
                                                         SmoothingConfig{cfg.smoothing.length, true, {true, true, true}});
      const auto peak_bin = static_cast<int>(std::max_element(basis.bins.begin(), basis.bins.end()) - basis.bins.begin());
      const double value = lab_value_of_bin(peak_bin, ch);
      (ch == LabChannel::L ? peak.L : ch == LabChannel::A ? peak.a : peak.b) = value;
    }
  }

  if (cfg.representative == RepresentativeMode::HistogramPeak) {
    feature.representative = clamp_to_gamut(peak);
  } else {
    double sum[3] = {0, 0, 0};
    for (const Lab& p : lab) {
      sum[0] += p.L;
      sum[1] += p.a;
      sum[2] += p.b;
    }
    const double n = static_cast<double>(lab.size());
    feature.representative = clamp_to_gamut(Lab{sum[0] / n, sum[1] / n, sum[2] / n});
  }
  return feature;
}

}  // namespace reid
