#include "reid/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "reid/error.hpp"

namespace fs = std::filesystem;

namespace reid::synth {
namespace {

constexpr int kWidth = 64;
constexpr int kHeight = 128;

// LIP palette ids used for drawing.
constexpr std::uint8_t kLipHair = 2;
constexpr std::uint8_t kLipUpper = 5;
constexpr std::uint8_t kLipPants = 9;
constexpr std::uint8_t kLipFace = 13;
constexpr std::uint8_t kLipLeftArm = 14;
constexpr std::uint8_t kLipRightArm = 15;
constexpr std::uint8_t kLipLeftLeg = 16;
constexpr std::uint8_t kLipRightLeg = 17;
constexpr std::uint8_t kLipLeftShoe = 18;
constexpr std::uint8_t kLipRightShoe = 19;

const std::vector<Rgb> kClothing = {
    {200, 30, 30},  {30, 60, 170},  {20, 20, 20},   {235, 235, 235}, {40, 130, 50},  {230, 200, 40},
    {120, 40, 140}, {240, 140, 30}, {110, 110, 110}, {20, 30, 80},   {130, 70, 30},  {240, 170, 190},
    {190, 170, 120}, {0, 128, 128}, {128, 0, 0},     {170, 210, 240},
};
const std::vector<Rgb> kSkin = {{241, 194, 125}, {224, 172, 105}, {198, 134, 66}, {141, 85, 36}, {255, 219, 172}};
const std::vector<Rgb> kHair = {{20, 15, 10}, {60, 40, 20}, {120, 80, 40}, {200, 170, 90}, {90, 90, 90}};
const std::vector<Rgb> kShoes = {{15, 15, 15}, {80, 50, 30}, {230, 230, 230}, {60, 60, 70}};

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

double luma(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

std::uint8_t clamp8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

int pmod(int a, int m) { return ((a % m) + m) % m; }

void fill_rect(SyntheticCrop& crop, int x0, int y0, int x1, int y1, std::uint8_t label) {
  x0 = std::clamp(x0, 0, kWidth);
  x1 = std::clamp(x1, 0, kWidth);
  y0 = std::clamp(y0, 0, kHeight);
  y1 = std::clamp(y1, 0, kHeight);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) crop.labels.labels[static_cast<std::size_t>(y) * kWidth + x] = label;
}

void fill_ellipse(SyntheticCrop& crop, double cx, double cy, double rx, double ry, std::uint8_t label) {
  for (int y = 0; y < kHeight; ++y)
    for (int x = 0; x < kWidth; ++x) {
      const double dx = (x + 0.5 - cx) / rx, dy = (y + 0.5 - cy) / ry;
      if (dx * dx + dy * dy <= 1.0) crop.labels.labels[static_cast<std::size_t>(y) * kWidth + x] = label;
    }
}

}  // namespace

GrayImage texture_patch(const TexturePattern& p, int width, int height) {
  if (p.period < 2) throw Error(ErrorCode::InvalidArgument, "texture period must be at least 2");
  GrayImage img(width, height);
  const int half = p.period / 2;
  const double r = p.period / 4.0;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const int u = pmod(x + p.phase_x, p.period);
      const int v = pmod(y + p.phase_y, p.period);
      double value = 0.0;
      switch (p.kind) {
        case TextureClass::Uniform: value = 0.0; break;
        case TextureClass::HorizontalLines: value = v < half ? 1.0 : 0.0; break;
        case TextureClass::VerticalLines: value = u < half ? 1.0 : 0.0; break;
        case TextureClass::Checkered: value = ((u < half) != (v < half)) ? 1.0 : 0.0; break;
        case TextureClass::Dots: {
          const double dx = u + 0.5 - p.period / 2.0, dy = v + 0.5 - p.period / 2.0;
          value = dx * dx + dy * dy <= r * r ? 1.0 : 0.0;
          break;
        }
      }
      img.values[static_cast<std::size_t>(y) * width + x] = value;
    }
  return img;
}

PersonAppearance random_appearance(std::mt19937_64& rng) {
  PersonAppearance a;
  a.colors[index_of(ParserClass::UpperClothes)] = pick(kClothing, rng);
  a.colors[index_of(ParserClass::Pants)] = pick(kClothing, rng);
  a.colors[index_of(ParserClass::Hair)] = pick(kHair, rng);
  a.colors[index_of(ParserClass::GlovesBoots)] = pick(kShoes, rng);
  const Rgb skin = pick(kSkin, rng);
  a.colors[index_of(ParserClass::Legs)] = skin;
  a.colors[index_of(ParserClass::Other)] = skin;

  // Pattern ink must differ clearly in brightness from the base color.
  const Rgb base = a.colors[index_of(ParserClass::UpperClothes)];
  do {
    a.secondary = pick(kClothing, rng);
  } while (std::abs(luma(a.secondary) - luma(base)) < 90.0);

  a.texture.kind = static_cast<TextureClass>(std::uniform_int_distribution<int>(0, kNumTextureClasses - 1)(rng));
  a.texture.period = std::uniform_int_distribution<int>(3, 5)(rng) * 2;
  a.long_hair = std::bernoulli_distribution(0.3)(rng);
  return a;
}

SyntheticCrop render_person(const PersonAppearance& a, std::mt19937_64& rng) {
  SyntheticCrop crop;
  crop.image = RgbImage(kWidth, kHeight);
  crop.labels = LabelImage{kWidth, kHeight, std::vector<std::uint8_t>(static_cast<std::size_t>(kWidth) * kHeight, 0)};

  std::uniform_int_distribution<int> jitter(-2, 2);
  const int ox = jitter(rng), oy = jitter(rng);

  // Back to front; later parts overwrite earlier ones.
  fill_rect(crop, 22 + ox, 102 + oy, 30 + ox, 118 + oy, kLipLeftLeg);
  fill_rect(crop, 34 + ox, 102 + oy, 42 + ox, 118 + oy, kLipRightLeg);
  fill_rect(crop, 19 + ox, 116 + oy, 31 + ox, 124 + oy, kLipLeftShoe);
  fill_rect(crop, 33 + ox, 116 + oy, 45 + ox, 124 + oy, kLipRightShoe);
  fill_rect(crop, 20 + ox, 62 + oy, 44 + ox, 104 + oy, kLipPants);
  fill_rect(crop, 10 + ox, 30 + oy, 16 + ox, 62 + oy, kLipLeftArm);
  fill_rect(crop, 48 + ox, 30 + oy, 54 + ox, 62 + oy, kLipRightArm);
  fill_rect(crop, 16 + ox, 26 + oy, 48 + ox, 66 + oy, kLipUpper);
  fill_ellipse(crop, 32 + ox, 17 + oy, 7.5, 9.0, kLipFace);
  if (a.long_hair) {
    fill_rect(crop, 22 + ox, 8 + oy, 25 + ox, 30 + oy, kLipHair);
    fill_rect(crop, 39 + ox, 8 + oy, 42 + ox, 30 + oy, kLipHair);
  }
  fill_ellipse(crop, 32 + ox, 10 + oy, 8.5, 4.5, kLipHair);

  const GrayImage pattern = texture_patch(a.texture, kWidth, kHeight);
  const double gain = std::uniform_real_distribution<double>(0.92, 1.08)(rng);
  std::normal_distribution<double> noise(0.0, 2.0);
  std::uniform_int_distribution<int> bg_level(90, 170);
  const Rgb background{static_cast<std::uint8_t>(bg_level(rng)), static_cast<std::uint8_t>(bg_level(rng)),
                       static_cast<std::uint8_t>(bg_level(rng))};

  for (int y = 0; y < kHeight; ++y)
    for (int x = 0; x < kWidth; ++x) {
      const auto i = static_cast<std::size_t>(y) * kWidth + x;
      const std::uint8_t label = crop.labels.labels[i];
      Rgb c = background;
      switch (label) {
        case kLipHair: c = a.colors[index_of(ParserClass::Hair)]; break;
        case kLipFace: c = a.colors[index_of(ParserClass::Other)]; break;
        case kLipLeftArm:
        case kLipRightArm:
        case kLipLeftLeg:
        case kLipRightLeg: c = a.colors[index_of(ParserClass::Legs)]; break;
        case kLipLeftShoe:
        case kLipRightShoe: c = a.colors[index_of(ParserClass::GlovesBoots)]; break;
        case kLipPants: c = a.colors[index_of(ParserClass::Pants)]; break;
        case kLipUpper: {
          // Pattern anchored to the garment so jitter moves it with the body.
          const int px = pmod(x - ox, kWidth), py = pmod(y - oy, kHeight);
          c = pattern.at(px, py) > 0.5 ? a.secondary : a.colors[index_of(ParserClass::UpperClothes)];
          break;
        }
        default: break;
      }
      crop.image.pixels[i] = Rgb{clamp8(c.r * gain + noise(rng)), clamp8(c.g * gain + noise(rng)),
                                 clamp8(c.b * gain + noise(rng))};
    }
  return crop;
}

void write_corpus(const std::string& images_dir, const std::string& masks_dir, std::size_t count,
                  std::size_t views_per_person, std::uint64_t seed) {
  if (views_per_person == 0) throw Error(ErrorCode::InvalidArgument, "views_per_person must be at least 1");
  fs::create_directories(images_dir);
  fs::create_directories(masks_dir);
  std::mt19937_64 rng(seed);
  PersonAppearance person;
  for (std::size_t n = 0; n < count; ++n) {
    if (n % views_per_person == 0) person = random_appearance(rng);
    const auto crop = render_person(person, rng);
    char name[64];
    std::snprintf(name, sizeof name, "p%04zu_%02zu.png", n / views_per_person, n % views_per_person);
    write_file((fs::path(images_dir) / name).string(), encode_png(crop.image));
    write_file((fs::path(masks_dir) / name).string(), encode_label_png(crop.labels));
  }
}

void write_market_dataset(const std::string& root, const std::string& masks, std::size_t identities,
                          std::size_t gallery_views, std::size_t distractors, std::uint64_t seed) {
  for (const char* split : {"query", "bounding_box_test"}) {
    fs::create_directories(fs::path(root) / split);
    fs::create_directories(fs::path(masks) / split);
  }
  std::mt19937_64 rng(seed);
  std::size_t frame = 0;
  auto emit = [&](const char* split, int pid, int cam, const SyntheticCrop& crop) {
    char name[64];
    std::snprintf(name, sizeof name, "%04d_c%ds1_%06zu_00", pid, cam, ++frame);
    write_file((fs::path(root) / split / (std::string(name) + ".png")).string(), encode_png(crop.image));
    write_file((fs::path(masks) / split / (std::string(name) + ".png")).string(), encode_label_png(crop.labels));
  };
  for (std::size_t id = 1; id <= identities; ++id) {
    const auto person = random_appearance(rng);
    emit("query", static_cast<int>(id), 1, render_person(person, rng));
    for (std::size_t v = 0; v < gallery_views; ++v)
      emit("bounding_box_test", static_cast<int>(id), static_cast<int>(2 + v % 5), render_person(person, rng));
  }
  for (std::size_t d = 0; d < distractors; ++d)
    emit("bounding_box_test", 0, static_cast<int>(1 + d % 6), render_person(random_appearance(rng), rng));
}

}  // namespace reid::synth
