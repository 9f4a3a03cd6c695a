#include "reid/config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <filesystem>
#include <sstream>

#include "reid/digest.hpp"
#include "reid/error.hpp"
#include "text_util.hpp"

namespace reid {
namespace {

constexpr std::array<std::string_view, kNumFeatureChannels> kChannelKeys = {"L", "a", "b", "d", "t"};

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(std::string_view key, std::string_view value) {
  const auto v = detail::parse_number<double>(value);
  if (!v) throw Error(ErrorCode::ConfigError, "config: '" + std::string(key) + "' is not a number");
  return *v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::ConfigError, "config: '" + std::string(key) + "' must be true or false");
}

std::array<bool, 3> parse_channel_list(std::string_view value) {
  std::array<bool, 3> out{};
  if (value == "none") return out;
  std::size_t start = 0;
  while (start <= value.size()) {
    auto end = value.find(',', start);
    if (end == std::string_view::npos) end = value.size();
    const auto item = detail::trim(value.substr(start, end - start));
    if (item == "L") out[0] = true;
    else if (item == "a") out[1] = true;
    else if (item == "b") out[2] = true;
    else throw Error(ErrorCode::ConfigError, "config: unknown smoothing channel '" + std::string(item) + "'");
    start = end + 1;
  }
  return out;
}

std::string channel_list(const std::array<bool, 3>& channels) {
  std::string out;
  constexpr std::string_view names[] = {"L", "a", "b"};
  for (int i = 0; i < 3; ++i)
    if (channels[i]) out += (out.empty() ? "" : ",") + std::string(names[i]);
  return out.empty() ? "none" : out;
}

Preset make_preset(std::string name, std::string description, int smoothing_length, bool before,
                   ChannelWeights channels, ClassWeights classes = {}) {
  PipelineConfig cfg;
  cfg.name = name;
  cfg.description = description;
  cfg.color.smoothing.length = smoothing_length;
  cfg.color.smoothing.before_compression = before;
  cfg.channels = channels;
  cfg.classes = classes;
  return Preset{std::move(name), std::move(description), std::move(cfg)};
}

std::vector<Preset> make_builtin_presets() {
  const auto base = ChannelWeights::of(0.13, 0.13, 0.13, 0.31, 0.3);
  std::vector<Preset> p;

  // Smoothing of the L histogram; base channel and class weights.
  p.push_back(make_preset("table3_1_row1", "no smoothing (base version)", 1, true, base));
  p.push_back(make_preset("table3_1_row2", "smoothing after 256->64 compression, l_f = 11", 11, false, base));
  p.push_back(make_preset("table3_1_row3", "smoothing before compression, l_f = 5", 5, true, base));
  p.push_back(make_preset("table3_1_row4", "smoothing before compression, l_f = 7", 7, true, base));
  p.push_back(make_preset("table3_1_row5", "smoothing before compression, l_f = 9", 9, true, base));
  p.push_back(make_preset("table3_1_row6", "smoothing before compression, l_f = 11", 11, true, base));
  p.push_back(make_preset("table3_1_row7", "smoothing before compression, l_f = 17", 17, true, base));

  // Channel weights (L, a, b, d, t); no smoothing except row 11.
  const std::array<std::pair<const char*, ChannelWeights>, 10> weight_rows = {{
      {"base version", base},
      {"smaller t", ChannelWeights::of(0.15, 0.15, 0.15, 0.3, 0.25)},
      {"larger t", ChannelWeights::of(0.1, 0.1, 0.1, 0.3, 0.4)},
      {"d only", ChannelWeights::of(0, 0, 0, 1, 0)},
      {"no d", ChannelWeights::of(0.24, 0.23, 0.23, 0, 0.3)},
      {"no a,b", ChannelWeights::of(0.5, 0, 0, 0.2, 0.3)},
      {"d > L", ChannelWeights::of(0.2, 0.1, 0.1, 0.3, 0.3)},
      {"d < L", ChannelWeights::of(0.3, 0.1, 0.1, 0.2, 0.3)},
      {"large L", ChannelWeights::of(0.25, 0.15, 0.15, 0.15, 0.3)},
      {"low a,b", ChannelWeights::of(0.2, 0.05, 0.05, 0.4, 0.3)},
  }};
  for (std::size_t i = 0; i < weight_rows.size(); ++i)
    p.push_back(make_preset("table3_2_row" + std::to_string(i + 1), weight_rows[i].first, 1, true, weight_rows[i].second));
  p.push_back(make_preset("table3_2_row11", "tuned channel weights with l_f = 11 smoothing before compression", 11,
                          true, ChannelWeights::of(0.2, 0.1, 0.1, 0.3, 0.3)));

  // Class weights (upper clothes, pants, hair, gloves/boots, legs, other).
  const std::array<ClassWeights, 6> class_rows = {{
      {{8, 6, 3, 2, 1, 1}},
      {{10, 6, 3, 2, 1, 1}},
      {{8, 4, 1, 1, 1, 1}},
      {{8, 2, 1, 1, 1, 1}},
      {{6, 2, 1, 1, 1, 1}},
      {{1, 1, 1, 1, 1, 1}},
  }};
  for (std::size_t i = 0; i < class_rows.size(); ++i) {
    std::ostringstream desc;
    desc << "class weights";
    for (double w : class_rows[i].w) desc << ' ' << w;
    p.push_back(make_preset("table3_3_row" + std::to_string(i + 1), desc.str(), 1, true, base, class_rows[i]));
  }
  return p;
}

}  // namespace

void PipelineConfig::validate() const {
  color.validate();
  channels.validate();
  classes.validate();
  distance.validate();
  latent_space.validate();
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  const auto lines = detail::content_lines(text);
  if (lines.empty() || detail::split_ws(lines.front()) != std::vector<std::string_view>{"reid-config", "v1"})
    throw Error(ErrorCode::ConfigError, "config: expected header 'reid-config v1'");

  PipelineConfig cfg = std::move(base);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto eq = lines[i].find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ConfigError, "config: expected 'key = value', got '" + std::string(lines[i]) + "'");
    const auto key = detail::trim(lines[i].substr(0, eq));
    const auto value = detail::trim(lines[i].substr(eq + 1));

    if (key == "name") cfg.name = value;
    else if (key == "description") cfg.description = value;
    else if (key == "smoothing.length") {
      const auto v = detail::parse_number<int>(value);
      if (!v) throw Error(ErrorCode::ConfigError, "config: smoothing.length must be an integer");
      cfg.color.smoothing.length = *v;
    } else if (key == "smoothing.before_compression") cfg.color.smoothing.before_compression = parse_bool(key, value);
    else if (key == "smoothing.channels") cfg.color.smoothing.channels = parse_channel_list(value);
    else if (key == "threshold_factor") cfg.color.threshold_factor = parse_double(key, value);
    else if (key == "representative") {
      if (value == "mean") cfg.color.representative = RepresentativeMode::Mean;
      else if (value == "peak") cfg.color.representative = RepresentativeMode::HistogramPeak;
      else throw Error(ErrorCode::ConfigError, "config: representative must be 'mean' or 'peak'");
    } else if (key == "d_threshold") cfg.distance.d_threshold = parse_double(key, value);
    else if (key.starts_with("weight.")) {
      const auto ch = key.substr(7);
      const auto it = std::find(kChannelKeys.begin(), kChannelKeys.end(), ch);
      if (it == kChannelKeys.end()) throw Error(ErrorCode::ConfigError, "config: unknown channel '" + std::string(ch) + "'");
      cfg.channels.w[static_cast<std::size_t>(it - kChannelKeys.begin())] = parse_double(key, value);
    } else if (key.starts_with("class.")) {
      const auto cls = parse_parser_class(key.substr(6));
      if (!cls || *cls == ParserClass::Background)
        throw Error(ErrorCode::ConfigError, "config: unknown parser class '" + std::string(key.substr(6)) + "'");
      cfg.classes[*cls] = parse_double(key, value);
    } else {
      throw Error(ErrorCode::ConfigError, "config: unknown key '" + std::string(key) + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::ostringstream out;
  out << "reid-config v1\n";
  out << "name = " << cfg.name << '\n';
  if (!cfg.description.empty()) out << "description = " << cfg.description << '\n';
  out << "smoothing.length = " << cfg.color.smoothing.length << '\n';
  out << "smoothing.before_compression = " << (cfg.color.smoothing.before_compression ? "true" : "false") << '\n';
  out << "smoothing.channels = " << channel_list(cfg.color.smoothing.channels) << '\n';
  out << "threshold_factor = " << format_double(cfg.color.threshold_factor) << '\n';
  out << "representative = " << (cfg.color.representative == RepresentativeMode::Mean ? "mean" : "peak") << '\n';
  out << "d_threshold = " << format_double(cfg.distance.d_threshold) << '\n';
  for (std::size_t i = 0; i < kNumFeatureChannels; ++i)
    out << "weight." << kChannelKeys[i] << " = " << format_double(cfg.channels.w[i]) << '\n';
  for (auto c : kRegionClasses) out << "class." << parser_class_name(c) << " = " << format_double(cfg.classes[c]) << '\n';
  return out.str();
}

const std::vector<Preset>& builtin_presets() {
  static const std::vector<Preset> presets = make_builtin_presets();
  return presets;
}

PipelineConfig resolve_preset(std::string_view name_or_path) {
  const std::string_view name = name_or_path == "default" ? kDefaultPreset : name_or_path;
  for (const auto& p : builtin_presets())
    if (p.name == name) return p.config;
  if (std::filesystem::is_regular_file(std::filesystem::path(std::string(name_or_path)))) {
    const auto bytes = read_file(std::string(name_or_path));
    return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + std::string(name_or_path) + "'");
}

std::string extraction_fingerprint(const PipelineConfig& cfg, const LabelMapping& mapping,
                                   std::string_view encoder_version) {
  std::ostringstream canon;
  canon << "reid-extraction v1\n";
  canon << "smoothing.length=" << cfg.color.smoothing.length << '\n';
  canon << "smoothing.before_compression=" << cfg.color.smoothing.before_compression << '\n';
  canon << "smoothing.channels=" << channel_list(cfg.color.smoothing.channels) << '\n';
  canon << "threshold_factor=" << format_double(cfg.color.threshold_factor) << '\n';
  canon << "representative=" << static_cast<int>(cfg.color.representative) << '\n';
  canon << "encoder=" << encoder_version << '\n';
  canon << mapping.serialize() << cfg.latent_space.serialize();
  return sha256_hex(canon.str());
}

}  // namespace reid
