#include <doctest.h>

#include <filesystem>

#include "reid/error.hpp"
#include "reid/feature_store.hpp"
#include "reid/synthetic.hpp"
#include "test_util.hpp"

using namespace reid;
using testutil::code_of;
namespace fs = std::filesystem;

namespace {

struct Corpus {
  testutil::TempDir dir;
  std::string images = dir / "images";
  std::string masks = dir / "masks";

  explicit Corpus(std::size_t count, std::uint64_t seed = 5) { synth::write_corpus(images, masks, count, 2, seed); }
};

IndexBuildResult build(const Corpus& c, const PipelineConfig& cfg = resolve_preset("default")) {
  return build_index(c.images, c.masks, cfg, LabelMapping::lip_default(), EncoderModel::fallback());
}


}  // namespace

TEST_CASE("indexing a corpus") {
  Corpus c(10);
  const auto result = build(c);
  CHECK(result.skipped.empty());
  const auto& store = result.store;
  REQUIRE(store.size() == 10);
  CHECK(store.records()[0].image_id == "p0000_00");
  CHECK(store.relative_path(0) == "p0000_00.png");
  CHECK(store.find("p0003_01") == 7u);
  CHECK_FALSE(store.find("nope"));
  CHECK(store.encoder_version() == EncoderModel::kFallbackVersion);
  CHECK(store.fingerprint() ==
        extraction_fingerprint(resolve_preset("default"), LabelMapping::lip_default(), EncoderModel::kFallbackVersion));
  CHECK(fs::path(store.images_root()).is_absolute());
  for (const auto& r : store.records()) {
    CHECK(r.has_region(ParserClass::UpperClothes));
    CHECK(r.has_region(ParserClass::Pants));
    CHECK(r.texture);
  }
}

TEST_CASE("missing masks are skipped and reported") {
  Corpus c(10);
  fs::remove(fs::path(c.masks) / "p0002_01.png");
  const auto result = build(c);
  CHECK(result.store.size() == 9);
  REQUIRE(result.skipped.size() == 1);
  CHECK(result.skipped[0].path == "p0002_01.png");
  CHECK(result.skipped[0].error_code == "MissingMask");
  CHECK_FALSE(result.store.find("p0002_01"));
}

TEST_CASE("nested layout and mask fallback") {
  testutil::TempDir dir;
  synth::write_corpus(dir / "images/cam1", dir / "masks/cam1", 2, 1, 9);
  synth::write_corpus(dir / "images/cam2", dir / "flat", 2, 1, 10);
  for (const auto& e : fs::directory_iterator(dir / "flat"))
    fs::rename(e.path(), fs::path(dir / "masks") / e.path().filename().string().replace(0, 1, "q"));
  for (const auto& e : fs::directory_iterator(dir / "images/cam2"))
    fs::rename(e.path(), e.path().parent_path() / e.path().filename().string().replace(0, 1, "q"));
  const auto result = build_index(dir / "images", dir / "masks", resolve_preset("default"), LabelMapping::lip_default(),
                                  EncoderModel::fallback());
  CHECK(result.skipped.empty());
  REQUIRE(result.store.size() == 4);
  CHECK(result.store.records()[0].image_id == "cam1/p0000_00");
  CHECK(result.store.records()[2].image_id == "cam2/q0000_00");
}

TEST_CASE("nothing indexable") {
  Corpus c(2);
  for (const auto& e : fs::directory_iterator(c.masks)) fs::remove(e.path());
  CHECK(code_of([&] { build(c); }) == ErrorCode::EmptyCorpus);
}

TEST_CASE("store round trip") {
  Corpus c(12);
  const auto store = build(c).store;
  const auto bytes = store.serialize();
  const auto back = FeatureStore::parse(bytes);
  CHECK(back.fingerprint() == store.fingerprint());
  CHECK(back.encoder_version() == store.encoder_version());
  CHECK(back.images_root() == store.images_root());
  CHECK(serialize_config(back.config()) == serialize_config(store.config()));
  CHECK(back.config().latent_space == store.config().latent_space);
  REQUIRE(back.size() == store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    CHECK(back.records()[i] == store.records()[i]);
    CHECK(back.relative_path(i) == store.relative_path(i));
  }
  CHECK(back.serialize() == bytes);

  SUBCASE("files") {
    testutil::TempDir dir;
    const auto path = dir / "gallery.reidx";
    store.save(path);
    CHECK(read_file(path) == bytes);
    CHECK(FeatureStore::load(path, store.fingerprint()).size() == 12);
    CHECK(code_of([&] { FeatureStore::load(path, std::string(64, '0')); }) == ErrorCode::FingerprintMismatch);
    CHECK(code_of([&] { FeatureStore::load(dir / "absent.reidx"); }) == ErrorCode::IoError);
  }
  SUBCASE("rebuild is byte-identical") { CHECK(build(c).store.serialize() == bytes); }
  SUBCASE("corruption") {
    auto truncated = bytes;
    truncated.resize(truncated.size() - 5);
    CHECK(code_of([&] { FeatureStore::parse(truncated); }) == ErrorCode::StoreFormatError);
    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(code_of([&] { FeatureStore::parse(trailing); }) == ErrorCode::StoreFormatError);
    auto magic = bytes;
    magic[0] = 'X';
    CHECK(code_of([&] { FeatureStore::parse(magic); }) == ErrorCode::StoreFormatError);
    auto version = bytes;
    version[8] = 9;
    CHECK(code_of([&] { FeatureStore::parse(version); }) == ErrorCode::StoreFormatError);
    CHECK(code_of([&] { FeatureStore::parse({}); }) == ErrorCode::StoreFormatError);
  }
}

TEST_CASE("duplicate ids are rejected") {
  PersonFeatureVector v;
  v.image_id = "a";
  v.regions[0] = RegionColorFeature{};
  CHECK(code_of([&] { FeatureStore("fp", "enc", PipelineConfig{}, "/", {v, v}, {"a.png", "b.png"}); }) ==
        ErrorCode::InvalidArgument);
}
