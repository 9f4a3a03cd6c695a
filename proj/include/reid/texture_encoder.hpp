#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reid/image.hpp"
#include "reid/mask_ingest.hpp"
#include "reid/texture_space.hpp"

namespace reid {

enum class LayerKind : std::uint8_t { Dense = 1, Conv2d = 2 };
enum class Activation : std::uint8_t { None = 0, Relu = 1, Tanh = 2, Sigmoid = 3 };

/// One encoder layer. Dense weights are out x in row-major; conv weights are
/// out_ch x in_ch x kernel x kernel. Input tensors are CHW.
struct EncoderLayer {
  std::string name;
  LayerKind kind = LayerKind::Dense;
  Activation activation = Activation::None;
  // Dense: in, out. Conv2d: in_ch, out_ch, kernel, stride, padding.
  std::uint32_t in = 0;
  std::uint32_t out = 0;
  std::uint32_t kernel = 0;
  std::uint32_t stride = 1;
  std::uint32_t padding = 0;
  std::vector<float> weights;
  std::vector<float> bias;

  std::size_t weight_count() const;
};

/// Texture encoder mapping a grayscale patch to a latent-space point.
///
/// Either a trained network loaded from a weight file, or the analytic
/// fallback (gradient anisotropy + autocorrelation statistics placed
/// relative to the configured cluster centers). Immutable once built.
class EncoderModel {
 public:
  static constexpr const char* kFallbackVersion = "fallback-v1";
  static constexpr int kDefaultInputSize = 64;

  static EncoderModel fallback();
  /// Validates the layer chain; throws ModelLoadError naming the first bad layer.
  static EncoderModel network(std::string version, int input_width, int input_height,
                              std::vector<EncoderLayer> layers);

  bool is_fallback() const { return layers_.empty(); }
  const std::string& version() const { return version_; }
  int input_width() const { return input_width_; }
  int input_height() const { return input_height_; }
  const std::vector<EncoderLayer>& layers() const { return layers_; }

  /// `patch` must already be input_width x input_height (any size for the fallback).
  TexturePoint run(const GrayImage& patch, const LatentSpaceConfig& ls) const;

 private:
  EncoderModel() = default;

  std::string version_ = kFallbackVersion;
  int input_width_ = kDefaultInputSize;
  int input_height_ = kDefaultInputSize;
  std::vector<EncoderLayer> layers_;
};

/// Weight container:
///   "RSAE" | u32 container version (1) | str32 version tag |
///   u32 input height | u32 input width | u32 input channels (1) |
///   u32 layer count | layer table | u64 parameter count | f32 parameters
/// Layer table entry: str32 name | u8 kind | u8 activation | u16 reserved |
///   u32 in | u32 out | u32 kernel | u32 stride | u32 padding.
/// Parameters follow in layer order, weights then bias. All little-endian.
std::vector<std::uint8_t> serialize_encoder(const EncoderModel& model);
EncoderModel parse_encoder(std::span<const std::uint8_t> bytes);
EncoderModel load_encoder(const std::string& path);

/// Resamples to the network input size and encodes; the fallback works on the
/// patch as given. Throws PatchTooSmall below 8x8.
TexturePoint encode_texture(const GrayImage& patch, const EncoderModel& model, const LatentSpaceConfig& ls);

/// Statistics the fallback encoder places in the latent space.
struct FallbackStatistics {
  double structure = 0.0;   // gradient energy squashed to [0,1); 0 for flat patches
  double anisotropy = 0.0;  // (Ey - Ex) / (Ex + Ey): +1 horizontal lines, -1 vertical
  double blobness = 0.0;    // 1 - autocorrelation anti-correlation depth: ~0 checkered, ~1 dots
};

FallbackStatistics fallback_statistics(const GrayImage& patch);

/// Grayscale crop of the region's bounding box; pixels outside the region
/// take the region's mean intensity. Throws EmptyRegion when absent.
GrayImage extract_texture_patch(const RgbImage& image, const RegionMaskSet& masks, ParserClass region);

}  // namespace reid
