#include "reid/search_service.hpp"

#include <cstdio>

#include "reid/error.hpp"
#include "reid/features.hpp"

using nlohmann::json;

namespace reid {
namespace {

constexpr std::array<const char*, kNumFeatureChannels> kChannelKeys = {"L", "a", "b", "d", "t"};

[[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::InvalidDescription, what); }

ParserClass region_from_json(const json& v) {
  if (!v.is_string()) schema_error("'region' must be a string");
  const auto c = parse_parser_class(v.get<std::string>());
  if (!c) schema_error("unknown region '" + v.get<std::string>() + "'");
  return *c;
}

ColorTerm color_from_json(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (!v.is_object()) schema_error("'color' must be a color name or an object with L, a, b");
  Lab lab;
  for (const char* key : {"L", "a", "b"}) {
    if (!v.contains(key) || !v[key].is_number()) schema_error(std::string("explicit color needs numeric '") + key + "'");
  }
  if (v.size() != 3) schema_error("explicit color takes exactly L, a, b");
  lab.L = v["L"].get<double>();
  lab.a = v["a"].get<double>();
  lab.b = v["b"].get<double>();
  return lab;
}

std::string hex64(std::uint64_t bits) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(bits));
  return buf;
}

}  // namespace

SearchService::SearchService(FeatureStore store, LabelMapping mapping, EncoderModel encoder, ColorNameTable colors)
    : store_(std::move(store)), mapping_(std::move(mapping)), encoder_(std::move(encoder)), colors_(std::move(colors)) {
  const auto fp = extraction_fingerprint(store_.config(), mapping_, encoder_.version());
  if (fp != store_.fingerprint())
    throw Error(ErrorCode::FingerprintMismatch,
                "store fingerprint " + store_.fingerprint() + " does not match the active label mapping and encoder (" +
                    fp + ")");
}

PipelineConfig SearchService::resolve(const std::optional<std::string>& preset, bool require_compatible) const {
  if (!preset || preset->empty()) return store_.config();
  PipelineConfig cfg = resolve_preset(*preset);
  if (require_compatible) {
    const auto fp = extraction_fingerprint(cfg, mapping_, encoder_.version());
    if (fp != store_.fingerprint())
      throw Error(ErrorCode::FingerprintMismatch, "preset " + *preset + " extracts features differently from the store (" +
                                                      fp + " vs " + store_.fingerprint() + ")");
  }
  return cfg;
}

SearchResponse SearchService::search_by_image(std::span<const std::uint8_t> image, std::span<const std::uint8_t> mask,
                                              std::size_t top_k, const std::optional<std::string>& preset) const {
  resolve(preset, true);
  const auto crop = load_mask("<query>", image, mask, mapping_);
  return search_by_features(extract_features(crop, store_.config(), encoder_), top_k, preset);
}

SearchResponse SearchService::search_by_features(const PersonFeatureVector& query, std::size_t top_k,
                                                 const std::optional<std::string>& preset) const {
  const PipelineConfig cfg = resolve(preset, true);
  const ScoringConfig scoring = cfg.scoring();
  SearchResponse resp;
  resp.query_kind = "image";
  resp.preset = cfg.name;
  resp.fingerprint = store_.fingerprint();
  for (auto c : query.present_regions()) resp.max_score += scoring.classes[c];

  const auto ranked = rank_gallery(query, store_.records(), scoring, top_k);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& g = store_.records()[*store_.find(ranked[i].image_id)];
    resp.hits.push_back({i + 1, ranked[i], max_achievable_score(query, g, scoring.classes)});
  }
  return resp;
}

SearchResponse SearchService::search_by_description(const DescriptionQuery& dq, std::size_t top_k,
                                                    const std::optional<std::string>& preset) const {
  PipelineConfig cfg = resolve(preset, false);
  // Gallery texture points live in the store's latent space.
  cfg.latent_space = store_.config().latent_space;
  const BuiltQuery q = build_query(dq, cfg.latent_space, colors_, cfg.channels, cfg.classes);

  ScoringConfig scoring = cfg.scoring();
  scoring.channels = q.channels;
  scoring.classes = q.classes;

  SearchResponse resp;
  resp.query_kind = "description";
  resp.preset = cfg.name;
  resp.fingerprint = store_.fingerprint();
  resp.max_score = q.max_score;
  const auto ranked = rank_gallery(q.features, store_.records(), scoring, top_k);
  for (std::size_t i = 0; i < ranked.size(); ++i) resp.hits.push_back({i + 1, ranked[i], q.max_score});
  return resp;
}

DescriptionQuery description_from_json(const json& doc) {
  if (!doc.is_object()) schema_error("description must be a JSON object");
  DescriptionQuery dq;
  if (doc.contains("regions")) {
    const auto& regions = doc["regions"];
    if (!regions.is_array()) schema_error("'regions' must be an array");
    for (const auto& item : regions) {
      if (!item.is_object() || !item.contains("region")) schema_error("each region term needs a 'region' field");
      RegionTerm term;
      term.region = region_from_json(item["region"]);
      for (const auto& [key, value] : item.items()) {
        if (key == "region") continue;
        if (value.is_null()) continue;
        if (key == "color") {
          term.color = color_from_json(value);
        } else if (key == "texture") {
          if (!value.is_string()) schema_error("'texture' must be a string");
          const auto t = parse_texture_class(value.get<std::string>());
          if (!t) schema_error("unknown texture '" + value.get<std::string>() + "'");
          term.texture = *t;
        } else {
          schema_error("unknown field '" + key + "' in region term");
        }
      }
      dq.regions.push_back(std::move(term));
    }
  }
  if (doc.contains("channel_weights") && !doc["channel_weights"].is_null()) {
    const auto& w = doc["channel_weights"];
    if (!w.is_object()) schema_error("'channel_weights' must be an object");
    ChannelWeights cw;
    for (std::size_t i = 0; i < kNumFeatureChannels; ++i) {
      if (!w.contains(kChannelKeys[i]) || !w[kChannelKeys[i]].is_number())
        schema_error(std::string("channel_weights needs numeric '") + kChannelKeys[i] + "'");
      cw.w[i] = w[kChannelKeys[i]].get<double>();
    }
    dq.channel_weights = cw;
  }
  return dq;
}

json description_to_json(const DescriptionQuery& dq) {
  json regions = json::array();
  for (const auto& term : dq.regions) {
    json t = {{"region", parser_class_name(term.region)}};
    if (term.color) {
      if (const auto* name = std::get_if<std::string>(&*term.color)) {
        t["color"] = *name;
      } else {
        const auto& lab = std::get<Lab>(*term.color);
        t["color"] = {{"L", lab.L}, {"a", lab.a}, {"b", lab.b}};
      }
    }
    if (term.texture) t["texture"] = texture_class_name(*term.texture);
    regions.push_back(std::move(t));
  }
  json doc = {{"regions", std::move(regions)}};
  if (dq.channel_weights) {
    json w = json::object();
    for (std::size_t i = 0; i < kNumFeatureChannels; ++i) w[kChannelKeys[i]] = dq.channel_weights->w[i];
    doc["channel_weights"] = std::move(w);
  }
  return doc;
}

json response_to_json(const SearchResponse& response) {
  json results = json::array();
  for (const auto& hit : response.hits) {
    json regions = json::array();
    for (const auto& rs : hit.result.regions)
      regions.push_back({{"region", parser_class_name(rs.region)},
                         {"class_weight", rs.class_weight},
                         {"similarity", rs.similarity},
                         {"contribution", rs.contribution}});
    results.push_back({{"rank", hit.rank},
                       {"image_id", hit.result.image_id},
                       {"score", hit.result.score},
                       {"max_score", hit.max_score},
                       {"regions", std::move(regions)}});
  }
  return {{"query_kind", response.query_kind},
          {"preset", response.preset},
          {"fingerprint", response.fingerprint},
          {"max_score", response.max_score},
          {"results", std::move(results)}};
}

json feature_summary_json(const PersonFeatureVector& v, const std::string& relative_path, const LatentSpaceConfig& ls) {
  json regions = json::array();
  for (auto c : v.present_regions()) {
    const auto& f = *v.regions[index_of(c)];
    regions.push_back({{"region", parser_class_name(c)},
                       {"representative_lab", {f.representative.L, f.representative.a, f.representative.b}},
                       {"histogram_bits",
                        {{"L", hex64(f.histograms[0].bits)},
                         {"a", hex64(f.histograms[1].bits)},
                         {"b", hex64(f.histograms[2].bits)}}}});
  }
  json texture = nullptr;
  if (v.texture)
    texture = {{"x", v.texture->x}, {"y", v.texture->y}, {"nearest_class", texture_class_name(nearest_class(*v.texture, ls))}};
  return {{"image_id", v.image_id}, {"path", relative_path}, {"regions", std::move(regions)}, {"texture", texture}};
}

json error_json(std::string_view code, std::string_view message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDescription:
    case ErrorCode::InvalidDescription:
    case ErrorCode::UnknownColorName:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::UnknownLabel:
    case ErrorCode::DecodeError:
    case ErrorCode::EmptyRegion:
    case ErrorCode::NoCommonRegions:
      return 422;
    case ErrorCode::UnknownItem:
    case ErrorCode::UnknownPreset:
      return 404;
    case ErrorCode::FingerprintMismatch:
      return 409;
    case ErrorCode::MissingMask:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ConfigError:
      return 400;
    default:
      return 500;
  }
}

}  // namespace reid
