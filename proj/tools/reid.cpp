// reid: index, search and evaluate parser-mask based person re-identification.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "reid/config.hpp"
#include "reid/error.hpp"
#include "reid/evaluation.hpp"
#include "reid/feature_store.hpp"
#include "reid/http_server.hpp"
#include "reid/search_service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

int exit_code_for(reid::ErrorCode code) {
  using reid::ErrorCode;
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::UnknownPreset:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyDescription:
    case ErrorCode::InvalidDescription:
    case ErrorCode::UnknownColorName:
      return kUsage;
    default:
      return kData;
  }
}

// Options shared by the subcommands that extract features.
struct PipelineOptions {
  std::string preset = std::string(reid::kDefaultPreset);
  std::vector<std::string> overrides;
  std::string mapping_path;
  std::string latent_space_path;
  std::string encoder_path;

  void add_to(CLI::App* cmd, bool with_preset = true) {
    if (with_preset)
      cmd->add_option("--preset,--config", preset, "Built-in preset name or config file")->capture_default_str();
    cmd->add_option("--set", overrides, "Config override key=value (repeatable)");
    cmd->add_option("--mapping", mapping_path, "Label mapping file (default: LIP 20-label palette)");
    cmd->add_option("--latent-space", latent_space_path, "Latent-space geometry file");
    cmd->add_option("--encoder", encoder_path, "Texture encoder weight file (default: analytic fallback)");
  }

  reid::PipelineConfig config(const std::string& name) const {
    reid::PipelineConfig cfg = reid::resolve_preset(name);
    if (!overrides.empty()) {
      std::string text = "reid-config v1\n";
      for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw reid::Error(reid::ErrorCode::ConfigError, "--set expects key=value, got '" + o + "'");
        text += o.substr(0, eq) + " = " + o.substr(eq + 1) + "\n";
      }
      cfg = reid::parse_config(text, cfg);
    }
    if (!latent_space_path.empty()) cfg.latent_space = reid::LatentSpaceConfig::load(latent_space_path);
    cfg.validate();
    return cfg;
  }
  reid::PipelineConfig config() const { return config(preset); }

  reid::LabelMapping mapping() const {
    return mapping_path.empty() ? reid::LabelMapping::lip_default() : reid::LabelMapping::load(mapping_path);
  }
  reid::EncoderModel encoder() const {
    return encoder_path.empty() ? reid::EncoderModel::fallback() : reid::load_encoder(encoder_path);
  }
};

reid::ColorNameTable load_colors(const std::string& path) {
  return path.empty() ? reid::ColorNameTable::builtin() : reid::ColorNameTable::load(path);
}

void print_response(const reid::SearchResponse& resp, bool as_json) {
  if (as_json) {
    std::cout << reid::response_to_json(resp).dump(2) << '\n';
    return;
  }
  std::printf("preset %s, max score %g\n", resp.preset.c_str(), resp.max_score);
  std::printf("%4s  %10s  %8s  %s\n", "rank", "score", "of max", "image_id");
  for (const auto& hit : resp.hits)
    std::printf("%4zu  %10.4f  %8g  %s\n", hit.rank, hit.result.score, hit.max_score, hit.result.image_id.c_str());
}

// upper_clothes:red:checkered, pants:black, upper_clothes::dots, legs:L=50,a=10,b=5
reid::RegionTerm parse_term(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.push_back(spec.substr(start, colon - start));
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 2 || parts.size() > 3)
    throw reid::Error(reid::ErrorCode::InvalidDescription, "term '" + spec + "' is not region:color[:texture]");
  json t = {{"region", parts[0]}};
  if (!parts[1].empty()) {
    if (parts[1].find('=') != std::string::npos) {
      json lab = json::object();
      std::size_t s = 0;
      while (s <= parts[1].size()) {
        const auto comma = std::min(parts[1].find(',', s), parts[1].size());
        const auto kv = parts[1].substr(s, comma - s);
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw reid::Error(reid::ErrorCode::InvalidDescription, "bad Lab triple in '" + spec + "'");
        try {
          lab[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
          throw reid::Error(reid::ErrorCode::InvalidDescription, "bad Lab value in '" + spec + "'");
        }
        s = comma + 1;
      }
      t["color"] = lab;
    } else {
      t["color"] = parts[1];
    }
  }
  if (parts.size() == 3 && !parts[2].empty()) t["texture"] = parts[2];
  return reid::description_from_json(json{{"regions", json::array({t})}}).regions.front();
}

reid::HttpServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server) g_server->stop();
}

std::pair<std::string, int> parse_bind(const std::string& bind) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw reid::Error(reid::ErrorCode::InvalidArgument, "--bind expects host:port");
  try {
    return {bind.substr(0, colon), std::stoi(bind.substr(colon + 1))};
  } catch (const std::exception&) {
    throw reid::Error(reid::ErrorCode::InvalidArgument, "--bind expects host:port");
  }
}

}  // namespace

int main(int argc, char** argv) {
  auto log = spdlog::stderr_color_mt("reid");
  spdlog::set_default_logger(log);
  spdlog::set_pattern("%^%l%$: %v");

  CLI::App app{"Person re-identification with parser masks, color histograms and texture embeddings"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // index
  auto* index_cmd = app.add_subcommand("index", "Extract features for an image corpus into a .reidx store");
  std::string images_dir, masks_dir, store_out;
  PipelineOptions index_opts;
  index_cmd->add_option("--images", images_dir, "Image directory (searched recursively)")->required()->check(CLI::ExistingDirectory);
  index_cmd->add_option("--masks", masks_dir, "Parser mask directory")->required()->check(CLI::ExistingDirectory);
  index_cmd->add_option("-o,--out", store_out, "Output store (.reidx)")->required();
  index_opts.add_to(index_cmd);

  // search
  auto* search_cmd = app.add_subcommand("search", "Rank a store against a query image and its mask");
  std::string store_path, query_image, query_mask, search_preset;
  std::size_t top_k = 10;
  bool as_json = false;
  PipelineOptions search_opts;
  search_cmd->add_option("--store", store_path, "Feature store (.reidx)")->required()->check(CLI::ExistingFile);
  search_cmd->add_option("--image", query_image, "Query image")->required()->check(CLI::ExistingFile);
  search_cmd->add_option("--mask", query_mask, "Query parser mask")->required()->check(CLI::ExistingFile);
  search_cmd->add_option("--preset", search_preset, "Scoring preset (default: the store's)");
  search_cmd->add_option("-k,--top-k", top_k, "Number of results")->check(CLI::PositiveNumber)->capture_default_str();
  search_cmd->add_flag("--json", as_json, "Print the API response document");
  search_opts.add_to(search_cmd, false);

  // describe-search
  auto* describe_cmd = app.add_subcommand("describe-search", "Rank a store against a textual description");
  std::string query_file, colors_path;
  std::vector<std::string> terms;
  describe_cmd->add_option("--store", store_path, "Feature store (.reidx)")->required()->check(CLI::ExistingFile);
  describe_cmd->add_option("--query", query_file, "Description document (JSON)")->check(CLI::ExistingFile);
  describe_cmd->add_option("--term", terms, "region:color[:texture], e.g. upper_clothes:white:checkered (repeatable)");
  describe_cmd->add_option("--preset", search_preset, "Scoring preset (default: the store's)");
  describe_cmd->add_option("-k,--top-k", top_k, "Number of results")->check(CLI::PositiveNumber)->capture_default_str();
  describe_cmd->add_option("--colors", colors_path, "Extra color names (reid-colors v1)");
  describe_cmd->add_flag("--json", as_json, "Print the API response document");
  PipelineOptions describe_opts;
  describe_opts.add_to(describe_cmd, false);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Single-query rank-1/rank-10/mAP on a Market1501-style dataset");
  std::string dataset_dir, report_path;
  std::vector<std::string> eval_presets;
  PipelineOptions eval_opts;
  eval_cmd->add_option("--dataset", dataset_dir, "Dataset root with query/ and bounding_box_test/")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--masks", masks_dir, "Mask root mirroring the dataset layout")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--preset", eval_presets, "Preset name or config file (repeatable; 'all' = every built-in)");
  eval_cmd->add_option("--report", report_path, "Write the tab-separated report here");
  eval_opts.add_to(eval_cmd, false);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP search API over a store");
  std::string bind = "127.0.0.1:8080";
  PipelineOptions serve_opts;
  serve_cmd->add_option("--store", store_path, "Feature store (.reidx)")->required()->check(CLI::ExistingFile);
  serve_cmd->add_option("--bind", bind, "host:port")->capture_default_str();
  serve_cmd->add_option("--colors", colors_path, "Extra color names (reid-colors v1)");
  serve_opts.add_to(serve_cmd, false);

  // presets
  auto* presets_cmd = app.add_subcommand("presets", "List built-in presets or export them as config files");
  std::string export_dir, show_name;
  presets_cmd->add_option("--export", export_dir, "Write every preset to <dir>/<name>.cfg");
  presets_cmd->add_option("--show", show_name, "Print one preset in config-file form");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*index_cmd) {
      const auto cfg = index_opts.config();
      const auto mapping = index_opts.mapping();
      const auto encoder = index_opts.encoder();
      spdlog::info("indexing {} with preset {} (encoder {})", images_dir, cfg.name, encoder.version());
      auto result = reid::build_index(images_dir, masks_dir, cfg, mapping, encoder);
      for (const auto& s : result.skipped) spdlog::warn("skipped {}: {}: {}", s.path, s.error_code, s.message);
      result.store.save(store_out);
      spdlog::info("wrote {} records to {} ({} skipped), fingerprint {}", result.store.size(), store_out,
                   result.skipped.size(), result.store.fingerprint());
      return kOk;
    }

    if (*search_cmd) {
      reid::SearchService service(reid::FeatureStore::load(store_path), search_opts.mapping(), search_opts.encoder());
      const auto resp = service.search_by_image(reid::read_file(query_image), reid::read_file(query_mask), top_k,
                                                search_preset.empty() ? std::nullopt : std::optional(search_preset));
      print_response(resp, as_json);
      return kOk;
    }

    if (*describe_cmd) {
      reid::DescriptionQuery dq;
      if (!query_file.empty()) {
        json doc;
        try {
          doc = json::parse(std::ifstream(query_file));
        } catch (const json::exception& e) {
          throw reid::Error(reid::ErrorCode::InvalidDescription, query_file + ": " + e.what());
        }
        dq = reid::description_from_json(doc);
      }
      for (const auto& t : terms) dq.regions.push_back(parse_term(t));
      reid::SearchService service(reid::FeatureStore::load(store_path), describe_opts.mapping(),
                                  describe_opts.encoder(), load_colors(colors_path));
      const auto resp = service.search_by_description(dq, top_k,
                                                      search_preset.empty() ? std::nullopt : std::optional(search_preset));
      print_response(resp, as_json);
      return kOk;
    }

    if (*eval_cmd) {
      std::vector<reid::PipelineConfig> configs;
      if (eval_presets.empty()) eval_presets.push_back(std::string(reid::kDefaultPreset));
      for (const auto& p : eval_presets) {
        if (p == "all") {
          for (const auto& b : reid::builtin_presets()) configs.push_back(eval_opts.config(b.name));
        } else {
          configs.push_back(eval_opts.config(p));
        }
      }
      const auto dataset = reid::load_dataset(dataset_dir);
      spdlog::info("{} queries, {} gallery images, {} preset(s)", dataset.queries.size(), dataset.gallery.size(),
                   configs.size());
      const auto reports = reid::ablation_sweep(dataset, masks_dir, configs, eval_opts.mapping(), eval_opts.encoder());
      std::cout << reid::format_report_table(reports);
      if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        out << reid::format_report_machine(reports);
        if (!out) throw reid::Error(reid::ErrorCode::IoError, "cannot write " + report_path);
        spdlog::info("report written to {}", report_path);
      }
      return kOk;
    }

    if (*serve_cmd) {
      const auto [host, port] = parse_bind(bind);
      reid::SearchService service(reid::FeatureStore::load(store_path), serve_opts.mapping(), serve_opts.encoder(),
                                  load_colors(colors_path));
      reid::HttpServer server(service);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      spdlog::info("serving {} records on http://{}:{}", service.store().size(), host, bound);
      server.run();
      g_server = nullptr;
      return kOk;
    }

    if (*presets_cmd) {
      if (!show_name.empty()) {
        std::cout << reid::serialize_config(reid::resolve_preset(show_name));
        return kOk;
      }
      if (!export_dir.empty()) {
        fs::create_directories(export_dir);
        for (const auto& p : reid::builtin_presets()) {
          const auto text = reid::serialize_config(p.config);
          reid::write_file((fs::path(export_dir) / (p.name + ".cfg")).string(),
                           std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
        }
        spdlog::info("exported {} presets to {}", reid::builtin_presets().size(), export_dir);
        return kOk;
      }
      for (const auto& p : reid::builtin_presets())
        std::printf("%-16s %s%s\n", p.name.c_str(), p.description.c_str(),
                    p.name == reid::kDefaultPreset ? " (default)" : "");
      return kOk;
    }
  } catch (const reid::Error& e) {
    spdlog::error("{}: {}", reid::error_code_name(e.code()), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    spdlog::critical("internal error: {}", e.what());
    return kInternal;
  }
  return kUsage;
}
