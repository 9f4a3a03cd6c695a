#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "reid/config.hpp"
#include "reid/error.hpp"
#include "reid/similarity.hpp"

using namespace reid;

namespace {

ChannelSimilarities sims(std::array<double, 5> s, bool texture = true) {
  ChannelSimilarities c;
  c.s = s;
  c.usable[4] = texture;
  return c;
}

RegionColorFeature random_region(std::mt19937_64& rng) {
  RegionColorFeature f;
  for (auto& h : f.histograms) h.bits = rng() & rng();
  std::uniform_real_distribution<double> L(0, 100), ab(-100, 100);
  f.representative = {L(rng), ab(rng), ab(rng)};
  return f;
}

PersonFeatureVector random_vector(std::mt19937_64& rng, std::string id) {
  PersonFeatureVector v;
  v.image_id = std::move(id);
  for (auto c : kRegionClasses)
    if (rng() % 3 != 0) v.regions[index_of(c)] = random_region(rng);
  if (v.has_region(ParserClass::UpperClothes) && rng() % 2) {
    std::uniform_real_distribution<double> u(-1, 1);
    v.texture = TexturePoint{u(rng), u(rng)};
  }
  return v;
}

}  // namespace

TEST_CASE("region similarity arithmetic") {
  CHECK(region_similarity(sims({1, 1, 1, 1, 1}), ChannelWeights{}) == doctest::Approx(1.0).epsilon(1e-12));
  const auto row1 = ChannelWeights::of(0.13, 0.13, 0.13, 0.31, 0.3);
  CHECK(region_similarity(sims({1, 1, 1, 0, 0}), row1) == doctest::Approx(0.39).epsilon(1e-12));

  const auto r = rescaled_weights(row1, {true, true, true, true, false});
  CHECK(r.w[0] == doctest::Approx(0.18571428571428572).epsilon(1e-12));
  CHECK(r.w[3] == doctest::Approx(0.4428571428571429).epsilon(1e-12));
  CHECK(r.w[4] == 0.0);
  CHECK(std::abs(std::accumulate(r.w.begin(), r.w.end(), 0.0) - 1.0) <= 1e-9);
}

TEST_CASE("fusion rows match the hand-computed oracle") {
  for (int row = 1; row <= 11; ++row) {
    CAPTURE(row);
    const auto cfg = resolve_preset("table3_2_row" + std::to_string(row));
    const auto& expected = oracle::kFusionRows[static_cast<std::size_t>(row - 1)];
    CHECK(std::abs(region_similarity(sims(oracle::kFusionInput), cfg.channels) - expected.full) <= 1e-9);
    CHECK(std::abs(region_similarity(sims(oracle::kFusionInput, false), cfg.channels) - expected.no_texture) <= 1e-9);
  }
}

TEST_CASE("rescaling keeps ratios and sums to one") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 500; ++t) {
    std::array<double, 5> raw{};
    for (auto& x : raw) x = u(rng);
    const double s = std::accumulate(raw.begin(), raw.end(), 0.0);
    ChannelWeights w;
    for (std::size_t i = 0; i < 5; ++i) w.w[i] = raw[i] / s;
    std::array<bool, 5> usable{};
    for (auto& b : usable) b = rng() % 4 != 0;
    if (std::none_of(usable.begin(), usable.end(), [](bool b) { return b; })) usable[0] = true;
    const auto r = rescaled_weights(w, usable);
    CHECK(std::abs(std::accumulate(r.w.begin(), r.w.end(), 0.0) - 1.0) <= 1e-9);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        if (usable[i] && usable[j]) CHECK(std::abs(r.w[i] / r.w[j] - w.w[i] / w.w[j]) <= 1e-9);
  }
}

TEST_CASE("region similarity bounds and monotonicity") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 500; ++t) {
    const auto& preset = builtin_presets()[rng() % builtin_presets().size()];
    auto s = sims({u(rng), u(rng), u(rng), u(rng), u(rng)}, rng() % 2);
    const double base = region_similarity(s, preset.config.channels);
    CHECK(base >= 0.0);
    CHECK(base <= 1.0 + 1e-12);
    const auto k = rng() % 5;
    s.s[k] = std::min(1.0, s.s[k] + u(rng));
    CHECK(region_similarity(s, preset.config.channels) >= base - 1e-15);
  }
}

TEST_CASE("class weight rows match the hand-computed totals") {
  // With the distance channel alone, S_c = 1 - |dL| / 40, so each region's
  // similarity can be planted through its representative colors.
  PersonFeatureVector q, g;
  q.image_id = "q";
  g.image_id = "g";
  for (auto c : kRegionClasses) {
    RegionColorFeature a, b;
    a.representative = {50.0, 0.0, 0.0};
    b.representative = {50.0 + 40.0 * (1.0 - oracle::kRegionInput[index_of(c)]), 0.0, 0.0};
    q.regions[index_of(c)] = a;
    g.regions[index_of(c)] = b;
  }
  for (int row = 1; row <= 6; ++row) {
    CAPTURE(row);
    auto cfg = resolve_preset("table3_3_row" + std::to_string(row)).scoring();
    cfg.channels = ChannelWeights::of(0, 0, 0, 1, 0);
    const auto result = total_similarity(q, g, cfg);
    CHECK(std::abs(result.score - oracle::kClassRowTotals[static_cast<std::size_t>(row - 1)]) <= 1e-9);
  }
}

TEST_CASE("total similarity") {
  std::mt19937_64 rng(40);
  ScoringConfig cfg;
  PersonFeatureVector upper;
  upper.image_id = "u";
  upper.regions[index_of(ParserClass::UpperClothes)] = random_region(rng);
  upper.texture = TexturePoint{0.3, 0.1};
  CHECK(total_similarity(upper, upper, cfg).score == doctest::Approx(8.0).epsilon(1e-12));

  auto both = upper;
  both.regions[index_of(ParserClass::Pants)] = random_region(rng);
  CHECK(total_similarity(both, both, cfg).score == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(max_achievable_score(both, both, cfg.classes) == 14.0);

  PersonFeatureVector hair;
  hair.image_id = "h";
  hair.regions[index_of(ParserClass::Hair)] = random_region(rng);
  try {
    total_similarity(upper, hair, cfg);
    FAIL("expected NoCommonRegions");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoCommonRegions);
  }
  CHECK(score_pair(upper, hair, cfg).score == 0.0);

  try {
    region_similarity(upper, hair, ParserClass::Hair, cfg);
    FAIL("expected RegionAbsent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RegionAbsent);
  }
}

TEST_CASE("symmetry and breakdown consistency") {
  std::mt19937_64 rng(41);
  const ScoringConfig cfg;
  for (int t = 0; t < 300; ++t) {
    const auto q = random_vector(rng, "q"), g = random_vector(rng, "g");
    const auto a = score_pair(q, g, cfg), b = score_pair(g, q, cfg);
    CHECK(std::abs(a.score - b.score) <= 1e-12);
    REQUIRE(a.regions.size() == b.regions.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.regions.size(); ++i) {
      CHECK(a.regions[i].region == b.regions[i].region);
      CHECK(a.regions[i].similarity >= 0.0);
      CHECK(a.regions[i].similarity <= 1.0 + 1e-12);
      sum += a.regions[i].class_weight * a.regions[i].similarity;
    }
    CHECK(std::abs(sum - a.score) <= 1e-9);
  }
}

TEST_CASE("self match scores the sum of present class weights") {
  std::mt19937_64 rng(42);
  const ScoringConfig cfg;
  for (int t = 0; t < 300; ++t) {
    const auto v = random_vector(rng, "v");
    double expected = 0.0;
    for (auto c : v.present_regions()) expected += cfg.classes[c];
    CHECK(std::abs(score_pair(v, v, cfg).score - expected) <= 1e-9);
  }
}

TEST_CASE("rank_gallery ordering") {
  std::mt19937_64 rng(43);
  const ScoringConfig cfg;
  std::vector<PersonFeatureVector> gallery;
  for (int i = 0; i < 100; ++i) gallery.push_back(random_vector(rng, "g" + std::to_string(1000 + i)));
  const auto q = random_vector(rng, "q");

  // Full-sort oracle.
  std::vector<std::pair<double, std::string>> expected;
  for (const auto& g : gallery) expected.emplace_back(-score_pair(q, g, cfg).score, g.image_id);
  std::sort(expected.begin(), expected.end());

  const auto ranked = rank_gallery(q, gallery, cfg, 100);
  REQUIRE(ranked.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) CHECK(ranked[i].image_id == expected[i].second);
  CHECK(rank_gallery(q, gallery, cfg, 7).size() == 7);
  CHECK(rank_gallery(q, gallery, cfg, 1000).size() == 100);

  SUBCASE("self first") {
    auto with_self = gallery;
    with_self.push_back(q);
    CHECK(rank_gallery(q, with_self, cfg, 1).front().image_id == "q");
  }
  SUBCASE("ties by image id") {
    std::vector<PersonFeatureVector> twins = {q, q, q};
    twins[0].image_id = "c";
    twins[1].image_id = "a";
    twins[2].image_id = "b";
    const auto r = rank_gallery(q, twins, cfg, 3);
    CHECK(r[0].image_id == "a");
    CHECK(r[1].image_id == "b");
    CHECK(r[2].image_id == "c");
  }
  SUBCASE("class weight scaling keeps the order") {
    ScoringConfig scaled = cfg;
    for (auto& w : scaled.classes.w) w *= 3.5;
    const auto r2 = rank_gallery(q, gallery, scaled, 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(r2[i].image_id == ranked[i].image_id);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(rank_gallery(q, gallery, cfg, 0), Error);
    try {
      rank_gallery(q, std::span<const PersonFeatureVector>{}, cfg, 5);
      FAIL("expected EmptyGallery");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::EmptyGallery);
    }
  }
}

TEST_CASE("weights validation") {
  CHECK_NOTHROW(ChannelWeights{}.validate());
  CHECK_THROWS_AS(ChannelWeights::of(0.2, 0.2, 0.2, 0.2, 0.3).validate(), Error);
  CHECK_THROWS_AS(ChannelWeights::of(-0.1, 0.3, 0.2, 0.3, 0.3).validate(), Error);
  ClassWeights cw;
  cw.w[2] = -1;
  CHECK_THROWS_AS(cw.validate(), Error);
}
