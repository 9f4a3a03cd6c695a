#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>

#include "reid/image.hpp"

namespace reid {

enum class LabChannel : std::uint8_t { L = 0, A = 1, B = 2 };

inline constexpr std::array<LabChannel, 3> kLabChannels = {LabChannel::L, LabChannel::A, LabChannel::B};

struct Lab {
  double L = 0.0;
  double a = 0.0;
  double b = 0.0;

  double operator[](LabChannel c) const { return c == LabChannel::L ? L : (c == LabChannel::A ? a : b); }
  friend bool operator==(const Lab&, const Lab&) = default;
};

/// sRGB (D65, IEC 61966-2-1 companding) to CIE-Lab.
Lab rgb_to_lab(Rgb rgb);

/// Lab coordinate -> 256-bin index: L*255/100, a+128, b+128, floored, clamped to [0,255].
int lab_bin_index(double value, LabChannel channel);

/// Inverse of lab_bin_index at the bin's lower edge.
double lab_value_of_bin(int bin, LabChannel channel);

struct ChannelHistogram256 {
  LabChannel channel = LabChannel::L;
  std::array<double, 256> bins{};
};

struct Histogram64 {
  LabChannel channel = LabChannel::L;
  std::array<double, 64> bins{};
};

/// 64 binary bins packed into one word; bit k is bin k.
struct BinaryHistogram64 {
  LabChannel channel = LabChannel::L;
  std::uint64_t bits = 0;

  bool test(int k) const { return (bits >> k) & 1u; }
  int count() const { return std::popcount(bits); }
  bool empty() const { return bits == 0; }
  friend bool operator==(const BinaryHistogram64&, const BinaryHistogram64&) = default;
};

struct SmoothingConfig {
  /// Uniform filter width; odd and >= 1. 1 disables smoothing.
  int length = 11;
  /// Smooth the 256-bin histogram (true) or the compressed 64-bin one (false).
  bool before_compression = true;
  /// Channels the filter is applied to. Only L by default.
  std::array<bool, 3> channels = {true, false, false};

  bool applies_to(LabChannel c) const { return channels[static_cast<std::size_t>(c)]; }
  void validate() const;
  friend bool operator==(const SmoothingConfig&, const SmoothingConfig&) = default;
};

enum class RepresentativeMode : std::uint8_t { Mean, HistogramPeak };

struct ColorExtractionConfig {
  SmoothingConfig smoothing;
  double threshold_factor = 1.0;
  RepresentativeMode representative = RepresentativeMode::Mean;

  void validate() const;
  friend bool operator==(const ColorExtractionConfig&, const ColorExtractionConfig&) = default;
};

struct DistanceConfig {
  double d_threshold = 40.0;

  void validate() const;
  friend bool operator==(const DistanceConfig&, const DistanceConfig&) = default;
};

/// Throws EmptyRegion for an empty pixel set.
ChannelHistogram256 build_histogram(std::span<const Rgb> pixels, LabChannel channel);
ChannelHistogram256 build_histogram(std::span<const Lab> pixels, LabChannel channel);

/// Centered moving average of width `length` with edge replication.
void uniform_filter(std::span<const double> in, std::span<double> out, int length);

/// Channels not selected in `cfg` pass through unchanged.
ChannelHistogram256 smooth_histogram(const ChannelHistogram256& h, const SmoothingConfig& cfg);
Histogram64 smooth_histogram(const Histogram64& h, const SmoothingConfig& cfg);

/// Output bin k = sum of input bins 4k..4k+3.
Histogram64 compress_histogram(const ChannelHistogram256& h);

/// Bit k set iff bin k > factor * mean bin value.
BinaryHistogram64 binarize(const Histogram64& h, double threshold_factor = 1.0);

/// |b1 & b2| / |b1 | b2|; 0 when both are empty.
double channel_similarity(const BinaryHistogram64& b1, const BinaryHistogram64& b2);

/// False when both histograms are empty: the pair carries no color evidence.
inline bool channel_usable(const BinaryHistogram64& b1, const BinaryHistogram64& b2) {
  return (b1.bits | b2.bits) != 0;
}

/// Clamps to L in [0,100], a/b in [-128,127].
Lab clamp_to_gamut(Lab c);

/// Per-channel Lab mean. Throws EmptyRegion.
Lab representative_color(std::span<const Rgb> pixels);

/// max(0, 1 - |c1 - c2| / d_threshold).
double distance_similarity(const Lab& c1, const Lab& c2, const DistanceConfig& cfg);

struct RegionColorFeature {
  std::array<BinaryHistogram64, 3> histograms{
      BinaryHistogram64{LabChannel::L, 0}, BinaryHistogram64{LabChannel::A, 0},
      BinaryHistogram64{LabChannel::B, 0}};
  Lab representative;

  const BinaryHistogram64& operator[](LabChannel c) const { return histograms[static_cast<std::size_t>(c)]; }
  friend bool operator==(const RegionColorFeature&, const RegionColorFeature&) = default;
};

/// Full color pipeline for one region. Throws EmptyRegion.
RegionColorFeature extract_region_color(std::span<const Rgb> pixels, const ColorExtractionConfig& cfg);

}  // namespace reid
