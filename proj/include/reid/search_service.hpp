#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "reid/error.hpp"
#include "reid/feature_store.hpp"
#include "reid/query_builder.hpp"

namespace reid {

struct SearchHit {
  std::size_t rank = 0;  // 1-based
  RankedResult result;
  double max_score = 0.0;  // best score this hit could have reached
};

struct SearchResponse {
  std::string query_kind;  // "image" or "description"
  std::string preset;
  std::string fingerprint;
  double max_score = 0.0;  // description: sum over described regions; image: sum over the query's regions
  std::vector<SearchHit> hits;
};

/// Read-only search over a loaded store. All methods are const and safe to
/// call concurrently.
class SearchService {
 public:
  SearchService(FeatureStore store, LabelMapping mapping, EncoderModel encoder,
                ColorNameTable colors = ColorNameTable::builtin());

  const FeatureStore& store() const { return store_; }
  const LabelMapping& mapping() const { return mapping_; }
  const ColorNameTable& colors() const { return colors_; }

  /// Scoring configuration: the store's own when `preset` is empty, otherwise
  /// the named preset. For image queries the preset must share the store's
  /// extraction fingerprint (FingerprintMismatch).
  PipelineConfig resolve(const std::optional<std::string>& preset, bool require_compatible) const;

  /// Extracts the query crop with the store's configuration and ranks the
  /// whole store. Throws FingerprintMismatch, InvalidArgument (top_k == 0) and
  /// extraction errors.
  SearchResponse search_by_image(std::span<const std::uint8_t> image, std::span<const std::uint8_t> mask,
                                 std::size_t top_k, const std::optional<std::string>& preset = {}) const;

  /// Ranks already extracted query features.
  SearchResponse search_by_features(const PersonFeatureVector& query, std::size_t top_k,
                                    const std::optional<std::string>& preset = {}) const;

  /// Throws EmptyDescription, InvalidDescription, UnknownColorName, UnknownPreset.
  SearchResponse search_by_description(const DescriptionQuery& dq, std::size_t top_k,
                                       const std::optional<std::string>& preset = {}) const;

 private:
  FeatureStore store_;
  LabelMapping mapping_;
  EncoderModel encoder_;
  ColorNameTable colors_;
};

// JSON documents. Region, texture and channel names are the snake_case
// forms used throughout (upper_clothes, checkered, L/a/b/d/t).

/// {"regions": [{"region": "upper_clothes", "color": "red" | {"L":..,"a":..,"b":..},
///               "texture": "checkered"}, ...],
///  "channel_weights": {"L":..,"a":..,"b":..,"d":..,"t":..}}   (optional)
/// Throws InvalidDescription on schema errors.
DescriptionQuery description_from_json(const nlohmann::json& doc);
nlohmann::json description_to_json(const DescriptionQuery& dq);

/// {"query_kind", "preset", "fingerprint", "max_score",
///  "results": [{"rank", "image_id", "score", "max_score",
///               "regions": [{"region", "class_weight", "similarity", "contribution"}]}]}
nlohmann::json response_to_json(const SearchResponse& response);

/// {"image_id", "path", "regions": [{"region", "representative_lab": [L,a,b],
///   "histogram_bits": {"L": "<16 hex digits>", ...}}], "texture": {"x","y","nearest_class"} | null}
nlohmann::json feature_summary_json(const PersonFeatureVector& v, const std::string& relative_path,
                                    const LatentSpaceConfig& ls);

/// {"error": {"code": "<ErrorCode name>", "message": "..."}}
nlohmann::json error_json(std::string_view code, std::string_view message);

/// HTTP status for a module error (4xx for caller mistakes, 500 otherwise).
int http_status_for(ErrorCode code);

}  // namespace reid
