#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reid/config.hpp"
#include "reid/mask_ingest.hpp"
#include "reid/similarity.hpp"
#include "reid/texture_encoder.hpp"

namespace reid {

enum class Split { Query, Gallery };

struct AnnotatedImage {
  std::string image_id;  // file stem
  std::string path;      // empty for synthetic entries
  int person_id = 0;     // -1 marks junk
  int camera_id = 0;
  Split split = Split::Gallery;

  bool junk() const { return person_id == -1; }
};

struct MarketName {
  int person_id;
  int camera_id;
};

/// `<pid>_c<cam>s<seq>_<frame>_<box>.<ext>`, pid may be -1. nullopt if not matching.
std::optional<MarketName> parse_market_filename(std::string_view filename);

struct Dataset {
  std::vector<AnnotatedImage> queries;
  std::vector<AnnotatedImage> gallery;
};

/// Reads `<root>/query` and `<root>/bounding_box_test`, sorted by file name.
/// Throws LayoutError (missing or empty splits), FilenameParseError (lists all offenders).
Dataset load_dataset(const std::string& root);

struct MetricsReport {
  std::string preset;
  double rank_1 = 0.0;   // percent
  double rank_10 = 0.0;  // percent
  double mAP = 0.0;      // percent
  std::size_t num_queries = 0;
  std::string fingerprint;
};

/// Returns gallery indices in ranked order for query `query_index`.
using Ranker = std::function<std::vector<std::size_t>(std::size_t query_index)>;

/// Single-query protocol: per query, gallery entries sharing both person and
/// camera are dropped, junk entries are dropped, and queries left without a
/// positive are skipped. AP is the mean of precision at each positive.
/// Throws NoValidQueries.
MetricsReport evaluate(std::span<const AnnotatedImage> queries, std::span<const AnnotatedImage> gallery,
                       const Ranker& ranker);

struct FeatureCorpus {
  std::vector<PersonFeatureVector> queries;
  std::vector<PersonFeatureVector> gallery;
  std::string fingerprint;
};

/// Mask for `<root>/<split>/<stem>.<ext>` is `<masks>/<split>/<stem>.png`,
/// falling back to `<masks>/<stem>.png`. Throws MissingMask.
std::string mask_path_for(const std::string& masks_dir, const AnnotatedImage& image);

FeatureCorpus extract_corpus(const Dataset& dataset, const std::string& masks_dir, const PipelineConfig& cfg,
                             const LabelMapping& mapping, const EncoderModel& encoder);

/// Full-gallery ranker over precomputed features.
Ranker feature_ranker(const FeatureCorpus& corpus, const ScoringConfig& scoring);

MetricsReport evaluate_corpus(const Dataset& dataset, const FeatureCorpus& corpus, const PipelineConfig& cfg);

/// One report per preset. Features are extracted once per distinct extraction fingerprint.
std::vector<MetricsReport> ablation_sweep(const Dataset& dataset, const std::string& masks_dir,
                                          std::span<const PipelineConfig> presets, const LabelMapping& mapping,
                                          const EncoderModel& encoder);

/// Aligned human-readable table, one decimal, round-to-nearest.
std::string format_report_table(std::span<const MetricsReport> reports);
/// Tab-separated: preset, rank1, rank10, mAP, num_queries (with a header line).
std::string format_report_machine(std::span<const MetricsReport> reports);

}  // namespace reid
