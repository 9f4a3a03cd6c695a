#pragma once

// Reference values and brute-force oracles shared by the unit tests and the
// acceptance binary. Tables were generated once by an independent reference
// implementation and are frozen here; do not regenerate them from this code base.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace oracle {

struct LabReference {
  int r, g, b;
  double L, a, bb;
};

// sRGB (D65) -> CIE Lab, computed with scikit-image's rgb2lab.
inline constexpr std::array<LabReference, 20> kLabTable = {{
    {0, 0, 0, 0.0, 0.0, 0.0},
    {255, 255, 255, 100.0000, -0.0025, 0.0047},
    {255, 0, 0, 53.2406, 80.0923, 67.2028},
    {0, 255, 0, 87.7351, -86.1830, 83.1797},
    {0, 0, 255, 32.2957, 79.1856, -107.8573},
    {255, 255, 0, 97.1395, -21.5547, 94.4781},
    {0, 255, 255, 91.1133, -48.0906, -14.1263},
    {255, 0, 255, 60.3235, 98.2331, -60.8210},
    {128, 128, 128, 53.5850, -0.0015, 0.0028},
    {64, 64, 64, 27.0934, -0.0009, 0.0017},
    {192, 192, 192, 77.7044, -0.0020, 0.0038},
    {128, 0, 0, 25.5354, 48.0450, 38.0571},
    {0, 128, 0, 46.2277, -51.6987, 49.8971},
    {0, 0, 128, 12.9712, 47.5011, -64.7004},
    {255, 128, 0, 67.0548, 42.8254, 74.0175},
    {128, 0, 255, 40.9087, 83.1665, -93.2866},
    {34, 139, 34, 50.5933, -49.5858, 45.0168},
    {210, 180, 140, 74.9758, 5.0199, 24.4310},
    {255, 192, 203, 83.5864, 24.1418, 3.3297},
    {75, 0, 130, 20.4689, 51.6846, -53.3105},
}};

// Channel similarities (S_L, S_a, S_b, S_d, S_t) used for the fusion oracle.
inline constexpr std::array<double, 5> kFusionInput = {0.9, 0.6, 0.3, 0.75, 0.5};

// Hand-computed region similarity for each channel-weight row (rows 1..11),
// with texture and with the texture channel missing (weights rescaled).
struct FusionExpectation {
  double full;
  double no_texture;
};
inline constexpr std::array<FusionExpectation, 11> kFusionRows = {{
    {0.6165, 0.6664285714285715},
    {0.62, 0.66},
    {0.605, 0.675},
    {0.75, 0.75},
    {0.573, 0.6042857142857143},
    {0.75, 0.8571428571428571},
    {0.645, 0.7071428571428572},
    {0.66, 0.7285714285714285},
    {0.6225, 0.675},
    {0.675, 0.75},
    {0.645, 0.7071428571428572},
}};

// Region similarities (upper, pants, hair, gloves/boots, legs, other) and the
// resulting total for each class-weight row (rows 1..6).
inline constexpr std::array<double, 6> kRegionInput = {0.8, 0.6, 0.5, 0.4, 0.9, 0.3};
inline constexpr std::array<double, 6> kClassRowTotals = {13.5, 15.1, 10.9, 9.7, 8.1, 3.5};

// Uniform center vs checkered center, default geometry, sigma 0.5.
inline constexpr double kUniformVsCheckered = 0.26360748180166005;
inline constexpr double kExpMinusHalf = 0.6065306597126334;

/// Binary Jaccard by enumerating all 64 bit positions.
inline double jaccard_by_enumeration(std::uint64_t a, std::uint64_t b) {
  int both = 0, either = 0;
  for (int k = 0; k < 64; ++k) {
    const bool x = (a >> k) & 1u, y = (b >> k) & 1u;
    both += x && y;
    either += x || y;
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

/// Moving average with edge replication, summing each window from scratch.
inline std::vector<double> naive_moving_average(const std::vector<double>& h, int length) {
  const int n = static_cast<int>(h.size()), half = length / 2;
  std::vector<double> out(h.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int k = i - half; k <= i + half; ++k) sum += h[static_cast<std::size_t>(std::clamp(k, 0, n - 1))];
    out[static_cast<std::size_t>(i)] = sum / length;
  }
  return out;
}

struct Annotation {
  int person;  // -1 junk
  int camera;
};

struct CmcMap {
  std::size_t valid_queries = 0;
  std::size_t rank1_hits = 0;
  std::size_t rank10_hits = 0;
  double rank_1 = 0.0;
  double rank_10 = 0.0;
  double mAP = 0.0;
};

/// Brute-force single-query CMC/mAP. `scores[q][g]` ranks the gallery by
/// score descending, then gallery index ascending.
inline CmcMap brute_force_cmc_map(const std::vector<Annotation>& queries, const std::vector<Annotation>& gallery,
                                  const std::vector<std::vector<double>>& scores) {
  CmcMap out;
  double ap_total = 0.0;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& qa = queries[q];
    if (qa.person == -1) continue;
    // Full ranking by selection: repeatedly take the best remaining entry.
    std::vector<bool> taken(gallery.size(), false);
    std::vector<std::size_t> order;
    for (std::size_t step = 0; step < gallery.size(); ++step) {
      std::size_t best = gallery.size();
      for (std::size_t g = 0; g < gallery.size(); ++g) {
        if (taken[g]) continue;
        if (best == gallery.size() || scores[q][g] > scores[q][best]) best = g;
      }
      taken[best] = true;
      order.push_back(best);
    }
    std::vector<bool> relevant;
    for (std::size_t g : order) {
      const auto& ga = gallery[g];
      const bool junk = ga.person == -1 || (ga.person == qa.person && ga.camera == qa.camera);
      if (!junk) relevant.push_back(ga.person == qa.person);
    }
    const auto positives = static_cast<std::size_t>(std::count(relevant.begin(), relevant.end(), true));
    if (positives == 0) continue;
    ++out.valid_queries;
    const auto first = static_cast<std::size_t>(std::find(relevant.begin(), relevant.end(), true) - relevant.begin());
    out.rank1_hits += first < 1;
    out.rank10_hits += first < 10;
    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < relevant.size(); ++k) {
      if (!relevant[k]) continue;
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    ap_total += ap / static_cast<double>(positives);
  }
  if (out.valid_queries > 0) {
    const double n = static_cast<double>(out.valid_queries);
    out.rank_1 = 100.0 * static_cast<double>(out.rank1_hits) / n;
    out.rank_10 = 100.0 * static_cast<double>(out.rank10_hits) / n;
    out.mAP = 100.0 * ap_total / n;
  }
  return out;
}

}  // namespace oracle
