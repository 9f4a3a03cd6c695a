#include <doctest.h>

#include <map>
#include <random>

#include <png.h>

#include "reid/error.hpp"
#include "reid/mask_ingest.hpp"
#include "test_util.hpp"

using namespace reid;

namespace {

RgbImage solid(int w, int h, Rgb c) { return RgbImage(w, h, c); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected reid::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("single-class 4x4 mask gives one 16-pixel region") {
  const auto crop = load_mask("a", encode_png(solid(4, 4, {255, 0, 0})), encode_label_png(testutil::labels(4, 4, 5)),
                              LabelMapping::lip_default());
  CHECK(crop.masks.pixel_count(ParserClass::UpperClothes) == 16);
  for (auto c : kRegionClasses)
    if (c != ParserClass::UpperClothes) CHECK_FALSE(crop.masks.has_region(c));
  const auto px = region_pixels(crop.masks, crop.image, ParserClass::UpperClothes);
  REQUIRE(px.size() == 16);
  for (auto p : px) CHECK(p == Rgb{255, 0, 0});
}

TEST_CASE("mask and image of different size are rejected") {
  CHECK(code_of([] {
          load_mask("a", encode_png(solid(4, 5, {})), encode_label_png(testutil::labels(4, 4, 5)),
                    LabelMapping::lip_default());
        }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("labels outside the palette raise UnknownLabel") {
  CHECK(code_of([] {
          load_mask("a", encode_png(solid(4, 4, {})), encode_label_png(testutil::labels(4, 4, 20)),
                    LabelMapping::lip_default());
        }) == ErrorCode::UnknownLabel);
}

TEST_CASE("undecodable inputs raise DecodeError") {
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5};
  CHECK(code_of([&] { load_mask("a", junk, encode_label_png(testutil::labels(4, 4)), LabelMapping::lip_default()); }) ==
        ErrorCode::DecodeError);
  CHECK(code_of([&] { load_mask("a", encode_png(solid(4, 4, {})), junk, LabelMapping::lip_default()); }) ==
        ErrorCode::DecodeError);
}

TEST_CASE("LIP labels aggregate to per-label counts from an independent scan") {
  std::mt19937 rng(11);
  auto lab = testutil::labels(23, 17);
  std::uniform_int_distribution<int> pick(0, 3);
  const std::uint8_t choices[] = {0, 5, 9, 2};
  for (auto& l : lab.labels) l = choices[pick(rng)];
  std::map<int, std::size_t> counts;
  for (auto l : lab.labels) ++counts[l];

  const auto crop = load_mask("x", encode_png(solid(23, 17, {1, 2, 3})), encode_label_png(lab), LabelMapping::lip_default());
  CHECK(crop.masks.pixel_count(ParserClass::UpperClothes) == counts[5]);
  CHECK(crop.masks.pixel_count(ParserClass::Pants) == counts[9]);
  CHECK(crop.masks.pixel_count(ParserClass::Hair) == counts[2]);
  CHECK(crop.masks.pixel_count(ParserClass::Background) == counts[0]);
}

TEST_CASE("checkerboard of upper clothes and pants splits 4x4 into two 8-pixel sets") {
  RgbImage img(4, 4);
  auto lab = testutil::labels(4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const bool upper = (x + y) % 2 == 0;
      lab.labels[static_cast<std::size_t>(y) * 4 + x] = upper ? 5 : 9;
      img.at(x, y) = upper ? Rgb{10, 20, 30} : Rgb{200, 100, 0};
    }
  const auto masks = aggregate_mask("c", lab, LabelMapping::lip_default(), 4, 4);
  const auto upper = region_pixels(masks, img, ParserClass::UpperClothes);
  const auto pants = region_pixels(masks, img, ParserClass::Pants);
  REQUIRE(upper.size() == 8);
  REQUIRE(pants.size() == 8);
  for (auto p : upper) CHECK(p == Rgb{10, 20, 30});
  for (auto p : pants) CHECK(p == Rgb{200, 100, 0});
  CHECK(region_pixels(masks, img, ParserClass::Hair).empty());
  CHECK(region_pixels(masks, img, ParserClass::Background).empty());
}

TEST_CASE("region counts partition the image") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 30), h = 1 + static_cast<int>(rng() % 30);
    auto lab = testutil::labels(w, h);
    for (auto& l : lab.labels) l = static_cast<std::uint8_t>(rng() % 20);
    const auto masks = aggregate_mask("p", lab, LabelMapping::lip_default(), w, h);
    std::size_t total = masks.pixel_count(ParserClass::Background);
    for (auto n : masks.region_counts()) total += n;
    CHECK(total == static_cast<std::size_t>(w) * h);
    CHECK(aggregate_mask("p", lab, LabelMapping::lip_default(), w, h).classes == masks.classes);
  }
}

TEST_CASE("default LIP mapping groups") {
  const auto m = LabelMapping::lip_default();
  CHECK(m.palette_size() == 20);
  CHECK(m[0] == ParserClass::Background);
  for (int l : {5, 6, 7}) CHECK(m[static_cast<std::uint8_t>(l)] == ParserClass::UpperClothes);
  for (int l : {9, 12}) CHECK(m[static_cast<std::uint8_t>(l)] == ParserClass::Pants);
  for (int l : {1, 2}) CHECK(m[static_cast<std::uint8_t>(l)] == ParserClass::Hair);
  for (int l : {3, 8, 18, 19}) CHECK(m[static_cast<std::uint8_t>(l)] == ParserClass::GlovesBoots);
  for (int l : {14, 15, 16, 17}) CHECK(m[static_cast<std::uint8_t>(l)] == ParserClass::Legs);
  for (int l : {4, 10, 11, 13}) CHECK(m[static_cast<std::uint8_t>(l)] == ParserClass::Other);
}

TEST_CASE("mapping files round-trip and totality is checked at load") {
  const auto m = LabelMapping::lip_default();
  CHECK(LabelMapping::parse(m.serialize()) == m);

  const auto custom = LabelMapping::parse("reid-label-mapping v1 3\n# comment\n0 background\n1 upper_clothes\n2 pants\n");
  CHECK(custom.palette_size() == 3);
  CHECK(custom[2] == ParserClass::Pants);

  CHECK(code_of([] { LabelMapping::parse("reid-label-mapping v1 3\n0 background\n1 pants\n"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { LabelMapping::parse("reid-label-mapping v1 2\n0 background\n1 shirt\n"); }) ==
        ErrorCode::ConfigError);
  CHECK(code_of([] { LabelMapping::parse("mapping\n0 background\n"); }) == ErrorCode::ConfigError);
}

std::vector<std::uint8_t> palette_png(int w, int h, const std::vector<std::uint8_t>& indices) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  png_set_write_fn(
      png, &out,
      [](png_structp p, png_bytep data, png_size_t n) {
        auto* v = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(p));
        v->insert(v->end(), data, data + n);
      },
      nullptr);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_PALETTE,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_color> palette(256);
  for (int i = 0; i < 256; ++i)
    palette[static_cast<std::size_t>(i)] = {static_cast<png_byte>(255 - i), static_cast<png_byte>(i * 7), 3};
  png_set_PLTE(png, info, palette.data(), 256);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(indices.data() + static_cast<std::size_t>(y) * w));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

TEST_CASE("palette PNG masks keep raw indices") {
  auto pal = testutil::labels(5, 4);
  for (std::size_t i = 0; i < pal.labels.size(); ++i) pal.labels[i] = static_cast<std::uint8_t>((i * 3) % 20);
  const auto decoded = decode_label_png(palette_png(5, 4, pal.labels));
  CHECK(decoded.labels == pal.labels);

  // Gray PNG round trip.
  auto lab = testutil::labels(7, 3);
  for (std::size_t i = 0; i < lab.labels.size(); ++i) lab.labels[i] = static_cast<std::uint8_t>(i % 20);
  const auto back = decode_label_png(encode_label_png(lab));
  CHECK(back.width == 7);
  CHECK(back.height == 3);
  CHECK(back.labels == lab.labels);
}
