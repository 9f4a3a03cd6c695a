#include "reid/texture_encoder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "binary_io.hpp"
#include "reid/error.hpp"

namespace reid {
namespace {

constexpr char kMagic[4] = {'R', 'S', 'A', 'E'};
constexpr std::uint32_t kContainerVersion = 1;
constexpr int kMinPatchSide = 8;

// Gradient energy at which structure reaches 1/2 (intensities in [0,1]).
constexpr double kStructureScale = 0.002;
// Largest autocorrelation shift examined, in pixels.
constexpr int kMaxShift = 16;

struct Shape {
  std::uint32_t channels, height, width;
  std::size_t size() const { return std::size_t{channels} * height * width; }
};

[[noreturn]] void layer_error(const EncoderLayer& layer, const std::string& what) {
  throw Error(ErrorCode::ModelLoadError, "layer '" + layer.name + "': " + what);
}

/// Output shape of `layer` applied to `in`; throws naming the layer on mismatch.
Shape propagate(const EncoderLayer& layer, const Shape& in) {
  std::ostringstream msg;
  if (layer.kind == LayerKind::Dense) {
    if (layer.in != in.size()) {
      msg << "expected input size " << in.size() << ", layer declares " << layer.in;
      layer_error(layer, msg.str());
    }
    if (layer.out == 0) layer_error(layer, "zero outputs");
    return Shape{layer.out, 1, 1};
  }
  if (layer.kind != LayerKind::Conv2d) layer_error(layer, "unknown layer kind");
  if (layer.in != in.channels) {
    msg << "expected " << in.channels << " input channels, layer declares " << layer.in;
    layer_error(layer, msg.str());
  }
  if (layer.kernel == 0 || layer.stride == 0 || layer.out == 0) layer_error(layer, "degenerate convolution");
  const auto span_h = in.height + 2 * layer.padding;
  const auto span_w = in.width + 2 * layer.padding;
  if (span_h < layer.kernel || span_w < layer.kernel) layer_error(layer, "kernel larger than padded input");
  return Shape{layer.out, (span_h - layer.kernel) / layer.stride + 1, (span_w - layer.kernel) / layer.stride + 1};
}

float activate(Activation a, float v) {
  switch (a) {
    case Activation::None: return v;
    case Activation::Relu: return v > 0.0f ? v : 0.0f;
    case Activation::Tanh: return std::tanh(v);
    case Activation::Sigmoid: return 1.0f / (1.0f + std::exp(-v));
  }
  return v;
}

std::vector<float> forward(const EncoderLayer& layer, const Shape& in_shape, const std::vector<float>& in) {
  const Shape out_shape = propagate(layer, in_shape);
  std::vector<float> out(out_shape.size());
  if (layer.kind == LayerKind::Dense) {
    for (std::uint32_t o = 0; o < layer.out; ++o) {
      float acc = layer.bias[o];
      const float* w = layer.weights.data() + std::size_t{o} * layer.in;
      for (std::uint32_t i = 0; i < layer.in; ++i) acc += w[i] * in[i];
      out[o] = activate(layer.activation, acc);
    }
    return out;
  }
  const int k = static_cast<int>(layer.kernel);
  const int pad = static_cast<int>(layer.padding);
  const int ih = static_cast<int>(in_shape.height), iw = static_cast<int>(in_shape.width);
  for (std::uint32_t oc = 0; oc < out_shape.channels; ++oc) {
    for (std::uint32_t oy = 0; oy < out_shape.height; ++oy) {
      for (std::uint32_t ox = 0; ox < out_shape.width; ++ox) {
        float acc = layer.bias[oc];
        for (std::uint32_t ic = 0; ic < in_shape.channels; ++ic) {
          const float* w = layer.weights.data() + ((std::size_t{oc} * in_shape.channels + ic) * k) * k;
          for (int ky = 0; ky < k; ++ky) {
            const int y = static_cast<int>(oy * layer.stride) + ky - pad;
            if (y < 0 || y >= ih) continue;
            for (int kx = 0; kx < k; ++kx) {
              const int x = static_cast<int>(ox * layer.stride) + kx - pad;
              if (x < 0 || x >= iw) continue;
              acc += w[ky * k + kx] * in[(std::size_t{ic} * ih + y) * iw + x];
            }
          }
        }
        out[(std::size_t{oc} * out_shape.height + oy) * out_shape.width + ox] = activate(layer.activation, acc);
      }
    }
  }
  return out;
}

TexturePoint place_fallback(const FallbackStatistics& s, const LatentSpaceConfig& ls) {
  const TexturePoint origin = ls.center(TextureClass::Uniform);
  auto offset = [&](TextureClass c) {
    return TexturePoint{ls.center(c).x - origin.x, ls.center(c).y - origin.y};
  };
  const double w_h = std::max(s.anisotropy, 0.0);
  const double w_v = std::max(-s.anisotropy, 0.0);
  const double isotropic = 1.0 - std::abs(s.anisotropy);
  const double w_c = isotropic * (1.0 - s.blobness);
  const double w_d = isotropic * s.blobness;

  const auto h = offset(TextureClass::HorizontalLines), v = offset(TextureClass::VerticalLines),
             c = offset(TextureClass::Checkered), d = offset(TextureClass::Dots);
  return TexturePoint{origin.x + s.structure * (w_h * h.x + w_v * v.x + w_c * c.x + w_d * d.x),
                      origin.y + s.structure * (w_h * h.y + w_v * v.y + w_c * c.y + w_d * d.y)};
}

}  // namespace

std::size_t EncoderLayer::weight_count() const {
  return kind == LayerKind::Dense ? std::size_t{in} * out : std::size_t{out} * in * kernel * kernel;
}

EncoderModel EncoderModel::fallback() { return EncoderModel(); }

EncoderModel EncoderModel::network(std::string version, int input_width, int input_height,
                                   std::vector<EncoderLayer> layers) {
  if (version.empty()) throw Error(ErrorCode::ModelLoadError, "encoder version tag is empty");
  if (version == kFallbackVersion) throw Error(ErrorCode::ModelLoadError, "version tag is reserved for the fallback");
  if (input_width < kMinPatchSide || input_height < kMinPatchSide)
    throw Error(ErrorCode::ModelLoadError, "encoder input must be at least 8x8");
  if (layers.empty()) throw Error(ErrorCode::ModelLoadError, "encoder has no layers");

  Shape shape{1, static_cast<std::uint32_t>(input_height), static_cast<std::uint32_t>(input_width)};
  for (const auto& layer : layers) {
    shape = propagate(layer, shape);
    if (layer.weights.size() != layer.weight_count()) {
      std::ostringstream msg;
      msg << "expected " << layer.weight_count() << " weights, got " << layer.weights.size();
      layer_error(layer, msg.str());
    }
    if (layer.bias.size() != layer.out) layer_error(layer, "bias length does not match output count");
  }
  if (shape.size() != 2) {
    std::ostringstream msg;
    msg << "final output has " << shape.size() << " values, a 2D latent point needs 2";
    layer_error(layers.back(), msg.str());
  }

  EncoderModel model;
  model.version_ = std::move(version);
  model.input_width_ = input_width;
  model.input_height_ = input_height;
  model.layers_ = std::move(layers);
  return model;
}

TexturePoint EncoderModel::run(const GrayImage& patch, const LatentSpaceConfig& ls) const {
  if (is_fallback()) return place_fallback(fallback_statistics(patch), ls);

  Shape shape{1, static_cast<std::uint32_t>(input_height_), static_cast<std::uint32_t>(input_width_)};
  std::vector<float> activations(patch.values.begin(), patch.values.end());
  for (const auto& layer : layers_) {
    activations = forward(layer, shape, activations);
    shape = propagate(layer, shape);
  }
  return TexturePoint{activations[0], activations[1]};
}

std::vector<std::uint8_t> serialize_encoder(const EncoderModel& model) {
  if (model.is_fallback()) throw Error(ErrorCode::InvalidArgument, "the fallback encoder has no weight file");
  detail::ByteWriter w;
  w.bytes(std::string_view(kMagic, 4));
  w.u32(kContainerVersion);
  w.str32(model.version());
  w.u32(static_cast<std::uint32_t>(model.input_height()));
  w.u32(static_cast<std::uint32_t>(model.input_width()));
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(model.layers().size()));
  std::uint64_t params = 0;
  for (const auto& l : model.layers()) {
    w.str32(l.name);
    w.u8(static_cast<std::uint8_t>(l.kind));
    w.u8(static_cast<std::uint8_t>(l.activation));
    w.u16(0);
    for (auto v : {l.in, l.out, l.kernel, l.stride, l.padding}) w.u32(v);
    params += l.weights.size() + l.bias.size();
  }
  w.u64(params);
  for (const auto& l : model.layers()) {
    for (float v : l.weights) w.f32(v);
    for (float v : l.bias) w.f32(v);
  }
  return std::move(w.buffer());
}

EncoderModel parse_encoder(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorCode::ModelLoadError);
  if (r.bytes(4) != std::string_view(kMagic, 4)) throw Error(ErrorCode::ModelLoadError, "not an encoder weight file");
  if (const auto v = r.u32(); v != kContainerVersion)
    throw Error(ErrorCode::ModelLoadError, "unsupported container version " + std::to_string(v));
  std::string version = r.str32();
  const auto height = r.u32();
  const auto width = r.u32();
  if (const auto ch = r.u32(); ch != 1)
    throw Error(ErrorCode::ModelLoadError, "encoder expects " + std::to_string(ch) + " input channels, only 1 is supported");
  const auto count = r.u32();
  if (count == 0 || count > 1024) throw Error(ErrorCode::ModelLoadError, "implausible layer count");

  std::vector<EncoderLayer> layers(count);
  std::uint64_t expected = 0;
  for (auto& l : layers) {
    l.name = r.str32();
    const auto kind = r.u8();
    const auto act = r.u8();
    r.u16();
    if (kind != 1 && kind != 2) layer_error(l, "unknown layer kind " + std::to_string(kind));
    if (act > 3) layer_error(l, "unknown activation " + std::to_string(act));
    l.kind = static_cast<LayerKind>(kind);
    l.activation = static_cast<Activation>(act);
    l.in = r.u32();
    l.out = r.u32();
    l.kernel = r.u32();
    l.stride = r.u32();
    l.padding = r.u32();
    expected += l.weight_count() + l.out;
  }
  const auto declared = r.u64();
  if (declared != expected) {
    throw Error(ErrorCode::ModelLoadError, "parameter count " + std::to_string(declared) +
                                               " disagrees with layer table (" + std::to_string(expected) + ")");
  }
  if (r.remaining() != declared * 4) {
    throw Error(ErrorCode::ModelLoadError, "truncated or oversized parameter block: expected " +
                                               std::to_string(declared * 4) + " bytes, found " +
                                               std::to_string(r.remaining()));
  }
  for (auto& l : layers) {
    l.weights.resize(l.weight_count());
    for (auto& v : l.weights) v = r.f32();
    l.bias.resize(l.out);
    for (auto& v : l.bias) v = r.f32();
  }
  return EncoderModel::network(std::move(version), static_cast<int>(width), static_cast<int>(height),
                               std::move(layers));
}

EncoderModel load_encoder(const std::string& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ModelLoadError, e.what());
  }
  return parse_encoder(bytes);
}

TexturePoint encode_texture(const GrayImage& patch, const EncoderModel& model, const LatentSpaceConfig& ls) {
  if (patch.width < kMinPatchSide || patch.height < kMinPatchSide) {
    throw Error(ErrorCode::PatchTooSmall, "texture patch is " + std::to_string(patch.width) + "x" +
                                              std::to_string(patch.height) + ", minimum is 8x8");
  }
  // The analytic statistics are resolution independent; stretching a
  // non-square patch to the network input would fake anisotropy.
  if (model.is_fallback() || (patch.width == model.input_width() && patch.height == model.input_height()))
    return model.run(patch, ls);
  return model.run(resize(patch, model.input_width(), model.input_height()), ls);
}

FallbackStatistics fallback_statistics(const GrayImage& patch) {
  const int w = patch.width, h = patch.height;
  FallbackStatistics s;

  double ex = 0.0, ey = 0.0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x + 1 < w; ++x) {
      const double d = patch.at(x + 1, y) - patch.at(x, y);
      ex += d * d;
    }
  for (int y = 0; y + 1 < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double d = patch.at(x, y + 1) - patch.at(x, y);
      ey += d * d;
    }
  ex /= static_cast<double>(h) * (w - 1);
  ey /= static_cast<double>(w) * (h - 1);
  const double energy = ex + ey;
  s.structure = energy / (energy + kStructureScale);
  s.anisotropy = energy > 0.0 ? (ey - ex) / energy : 0.0;

  double mean = 0.0;
  for (double v : patch.values) mean += v;
  mean /= static_cast<double>(patch.values.size());
  double var = 0.0;
  for (double v : patch.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(patch.values.size());
  if (var <= 1e-12) {
    s.blobness = 0.5;
    return s;
  }

  // Strongest anti-correlation over a half-plane of shifts. Two-tone patterns
  // with equal areas (checkerboards) reach -1; sparse blobs on a background
  // only reach -p/(1-p) for blob area fraction p.
  double min_corr = 1.0;
  const int max_dy = std::min(kMaxShift, h - 1);
  const int max_dx = std::min(kMaxShift, w - 1);
  for (int dy = 0; dy <= max_dy; ++dy) {
    for (int dx = -max_dx; dx <= max_dx; ++dx) {
      if (dy == 0 && dx <= 0) continue;
      double acc = 0.0;
      std::size_t n = 0;
      for (int y = 0; y + dy < h; ++y) {
        for (int x = std::max(0, -dx); x < w && x + dx < w; ++x) {
          acc += (patch.at(x, y) - mean) * (patch.at(x + dx, y + dy) - mean);
          ++n;
        }
      }
      if (n > 0) min_corr = std::min(min_corr, acc / (static_cast<double>(n) * var));
    }
  }
  s.blobness = 1.0 - std::clamp(-min_corr, 0.0, 1.0);
  return s;
}

GrayImage extract_texture_patch(const RgbImage& image, const RegionMaskSet& masks, ParserClass region) {
  int x0 = masks.width, y0 = masks.height, x1 = -1, y1 = -1;
  double sum = 0.0;
  std::size_t count = 0;
  auto gray = [](const Rgb& p) { return (0.299 * p.r + 0.587 * p.g + 0.114 * p.b) / 255.0; };
  for (int y = 0; y < masks.height; ++y) {
    for (int x = 0; x < masks.width; ++x) {
      if (masks.at(x, y) != region) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
      sum += gray(image.at(x, y));
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::EmptyRegion, "region is absent from the mask");
  const double fill = sum / static_cast<double>(count);

  GrayImage patch(x1 - x0 + 1, y1 - y0 + 1, fill);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (masks.at(x, y) == region) patch.at(x - x0, y - y0) = gray(image.at(x, y));
  return patch;
}

}  // namespace reid
