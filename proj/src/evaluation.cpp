#include "reid/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <regex>
#include <sstream>

#include "parallel.hpp"
#include "reid/error.hpp"
#include "reid/features.hpp"

namespace fs = std::filesystem;

namespace reid {
namespace {

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".bmp";
}

std::vector<AnnotatedImage> load_split(const fs::path& dir, Split split, std::vector<std::string>& bad) {
  std::vector<AnnotatedImage> out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto parsed = parse_market_filename(f.filename().string());
    if (!parsed) {
      bad.push_back(f.string());
      continue;
    }
    out.push_back(AnnotatedImage{f.stem().string(), f.string(), parsed->person_id, parsed->camera_id, split});
  }
  return out;
}

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

}  // namespace

std::optional<MarketName> parse_market_filename(std::string_view filename) {
  static const std::regex pattern(R"(^(-1|\d+)_c(\d+)s\d+_\d+_\d+\.[A-Za-z]+$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(filename.begin(), filename.end(), m, pattern)) return std::nullopt;
  return MarketName{std::stoi(m[1].str()), std::stoi(m[2].str())};
}

Dataset load_dataset(const std::string& root) {
  const fs::path base(root);
  const fs::path query_dir = base / "query";
  const fs::path gallery_dir = base / "bounding_box_test";
  if (!fs::is_directory(query_dir) || !fs::is_directory(gallery_dir))
    throw Error(ErrorCode::LayoutError, root + ": expected query/ and bounding_box_test/ subdirectories");

  std::vector<std::string> bad;
  Dataset ds;
  ds.queries = load_split(query_dir, Split::Query, bad);
  ds.gallery = load_split(gallery_dir, Split::Gallery, bad);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << bad.size() << " file(s) do not follow the <pid>_c<cam>s<seq>_<frame>_<box> naming scheme:";
    for (const auto& b : bad) msg << "\n  " << b;
    throw Error(ErrorCode::FilenameParseError, msg.str());
  }
  if (ds.queries.empty() || ds.gallery.empty())
    throw Error(ErrorCode::LayoutError, root + ": query or gallery split contains no images");
  return ds;
}

MetricsReport evaluate(std::span<const AnnotatedImage> queries, std::span<const AnnotatedImage> gallery,
                       const Ranker& ranker) {
  struct QueryOutcome {
    bool valid = false;
    bool hit1 = false;
    bool hit10 = false;
    double ap = 0.0;
  };
  std::vector<QueryOutcome> outcomes(queries.size());

  detail::parallel_for(queries.size(), [&](std::size_t qi) {
    const auto& q = queries[qi];
    if (q.junk()) return;
    std::size_t positives = 0;
    for (const auto& g : gallery)
      if (g.person_id == q.person_id && g.camera_id != q.camera_id) ++positives;
    if (positives == 0) return;

    QueryOutcome out;
    out.valid = true;
    std::size_t position = 0;  // 1-based rank after filtering
    std::size_t hits = 0;
    for (std::size_t gi : ranker(qi)) {
      const auto& g = gallery[gi];
      if (g.junk() || (g.person_id == q.person_id && g.camera_id == q.camera_id)) continue;
      ++position;
      if (g.person_id != q.person_id) continue;
      ++hits;
      if (position <= 1) out.hit1 = true;
      if (position <= 10) out.hit10 = true;
      out.ap += static_cast<double>(hits) / static_cast<double>(position);
    }
    out.ap /= static_cast<double>(positives);
    outcomes[qi] = out;
  }, 16);

  MetricsReport report;
  std::size_t hit1 = 0, hit10 = 0;
  double ap_sum = 0.0;
  for (const auto& o : outcomes) {
    if (!o.valid) continue;
    ++report.num_queries;
    hit1 += o.hit1;
    hit10 += o.hit10;
    ap_sum += o.ap;
  }
  if (report.num_queries == 0) throw Error(ErrorCode::NoValidQueries, "no query has a cross-camera positive in the gallery");
  const double n = static_cast<double>(report.num_queries);
  report.rank_1 = 100.0 * static_cast<double>(hit1) / n;
  report.rank_10 = 100.0 * static_cast<double>(hit10) / n;
  report.mAP = 100.0 * ap_sum / n;
  return report;
}

std::string mask_path_for(const std::string& masks_dir, const AnnotatedImage& image) {
  const fs::path img(image.path);
  const fs::path stem_png = img.stem().string() + ".png";
  const fs::path nested = fs::path(masks_dir) / img.parent_path().filename() / stem_png;
  if (fs::is_regular_file(nested)) return nested.string();
  const fs::path flat = fs::path(masks_dir) / stem_png;
  if (fs::is_regular_file(flat)) return flat.string();
  throw Error(ErrorCode::MissingMask, "no mask for " + image.path + " under " + masks_dir);
}

FeatureCorpus extract_corpus(const Dataset& dataset, const std::string& masks_dir, const PipelineConfig& cfg,
                             const LabelMapping& mapping, const EncoderModel& encoder) {
  FeatureCorpus corpus;
  corpus.fingerprint = extraction_fingerprint(cfg, mapping, encoder.version());
  auto extract_all = [&](const std::vector<AnnotatedImage>& images) {
    std::vector<PersonFeatureVector> out(images.size());
    detail::parallel_for(images.size(), [&](std::size_t i) {
      const auto& img = images[i];
      const auto crop = load_mask(img.image_id, read_file(img.path), read_file(mask_path_for(masks_dir, img)), mapping);
      out[i] = extract_features(crop, cfg, encoder);
    }, 8);
    return out;
  };
  corpus.queries = extract_all(dataset.queries);
  corpus.gallery = extract_all(dataset.gallery);
  return corpus;
}

Ranker feature_ranker(const FeatureCorpus& corpus, const ScoringConfig& scoring) {
  return [&corpus, scoring](std::size_t qi) {
    std::vector<RankedResult> scored(corpus.gallery.size());
    for (std::size_t i = 0; i < corpus.gallery.size(); ++i) scored[i] = score_pair(corpus.queries[qi], corpus.gallery[i], scoring);
    std::vector<std::size_t> order(scored.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ranks_before(scored[a], scored[b]); });
    return order;
  };
}

MetricsReport evaluate_corpus(const Dataset& dataset, const FeatureCorpus& corpus, const PipelineConfig& cfg) {
  MetricsReport report = evaluate(dataset.queries, dataset.gallery, feature_ranker(corpus, cfg.scoring()));
  report.preset = cfg.name;
  report.fingerprint = corpus.fingerprint;
  return report;
}

std::vector<MetricsReport> ablation_sweep(const Dataset& dataset, const std::string& masks_dir,
                                          std::span<const PipelineConfig> presets, const LabelMapping& mapping,
                                          const EncoderModel& encoder) {
  std::map<std::string, FeatureCorpus> corpora;
  std::vector<MetricsReport> reports;
  for (const auto& cfg : presets) {
    cfg.validate();
    const auto fp = extraction_fingerprint(cfg, mapping, encoder.version());
    auto it = corpora.find(fp);
    if (it == corpora.end()) it = corpora.emplace(fp, extract_corpus(dataset, masks_dir, cfg, mapping, encoder)).first;
    reports.push_back(evaluate_corpus(dataset, it->second, cfg));
  }
  return reports;
}

std::string format_report_table(std::span<const MetricsReport> reports) {
  std::size_t width = 6;
  for (const auto& r : reports) width = std::max(width, r.preset.size());
  std::ostringstream out;
  auto pad = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  out << pad("preset", width) << "  rank-1  rank-10    mAP  queries\n";
  out << std::string(width, '-') << "  ------  -------  -----  -------\n";
  for (const auto& r : reports) {
    char line[128];
    std::snprintf(line, sizeof line, "  %6s  %7s  %5s  %7zu\n", one_decimal(r.rank_1).c_str(),
                  one_decimal(r.rank_10).c_str(), one_decimal(r.mAP).c_str(), r.num_queries);
    out << pad(r.preset, width) << line;
  }
  return out.str();
}

std::string format_report_machine(std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << "preset\trank1\trank10\tmAP\tnum_queries\n";
  for (const auto& r : reports)
    out << r.preset << '\t' << one_decimal(r.rank_1) << '\t' << one_decimal(r.rank_10) << '\t' << one_decimal(r.mAP)
        << '\t' << r.num_queries << '\n';
  return out.str();
}

}  // namespace reid
