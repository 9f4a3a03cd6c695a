#include "reid/feature_store.hpp"

#include <algorithm>
#include <filesystem>
#include <json.hpp>

#include "binary_io.hpp"
#include "parallel.hpp"
#include "reid/error.hpp"
#include "reid/features.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace reid {
namespace {

constexpr std::string_view kMagic{"REIDX\r\n\x1a", 8};

bool is_image_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".bmp";
}

std::string find_mask(const fs::path& masks_dir, const fs::path& relative) {
  fs::path nested = masks_dir / relative;
  nested.replace_extension(".png");
  if (fs::is_regular_file(nested)) return nested.string();
  const fs::path flat = masks_dir / (relative.stem().string() + ".png");
  if (fs::is_regular_file(flat)) return flat.string();
  throw Error(ErrorCode::MissingMask, "no mask for " + relative.generic_string());
}

}  // namespace

FeatureStore::FeatureStore(std::string fingerprint, std::string encoder_version, PipelineConfig config,
                           std::string images_root, std::vector<PersonFeatureVector> records,
                           std::vector<std::string> relative_paths)
    : fingerprint_(std::move(fingerprint)),
      encoder_version_(std::move(encoder_version)),
      config_(std::move(config)),
      images_root_(std::move(images_root)),
      records_(std::move(records)),
      paths_(std::move(relative_paths)) {
  if (paths_.size() != records_.size()) throw Error(ErrorCode::InvalidArgument, "one relative path per record required");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    records_[i].validate();
    if (!by_id_.emplace(records_[i].image_id, i).second)
      throw Error(ErrorCode::InvalidArgument, "duplicate image id " + records_[i].image_id);
  }
}

std::optional<std::size_t> FeatureStore::find(std::string_view image_id) const {
  const auto it = by_id_.find(image_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::uint8_t> FeatureStore::serialize() const {
  const json header = {
      {"format_version", kFormatVersion},
      {"fingerprint", fingerprint_},
      {"encoder_version", encoder_version_},
      {"config", serialize_config(config_)},
      {"latent_space", config_.latent_space.serialize()},
      {"record_count", records_.size()},
      {"images_root", images_root_},
  };

  detail::ByteWriter w;
  w.bytes(kMagic);
  w.u32(kFormatVersion);
  w.str32(header.dump(2));
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    w.str32(r.image_id);
    w.str32(paths_[i]);
    std::uint8_t mask = 0;
    for (auto c : kRegionClasses)
      if (r.has_region(c)) mask |= static_cast<std::uint8_t>(1u << index_of(c));
    w.u8(mask);
    w.u8(r.texture ? 1 : 0);
    for (auto c : kRegionClasses) {
      if (!r.has_region(c)) continue;
      const auto& f = *r.regions[index_of(c)];
      for (const auto& h : f.histograms) w.u64(h.bits);
      for (LabChannel ch : kLabChannels) w.f64(f.representative[ch]);
    }
    if (r.texture) {
      w.f64(r.texture->x);
      w.f64(r.texture->y);
    }
  }
  return std::move(w.buffer());
}

FeatureStore FeatureStore::parse(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, ErrorCode::StoreFormatError);
  if (r.bytes(kMagic.size()) != kMagic) throw Error(ErrorCode::StoreFormatError, "not a feature store (bad magic)");
  const auto version = r.u32();
  if (version != kFormatVersion)
    throw Error(ErrorCode::StoreFormatError, "unsupported store format version " + std::to_string(version));

  json header;
  try {
    header = json::parse(r.str32());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreFormatError, std::string("bad store header: ") + e.what());
  }

  std::string fingerprint, encoder_version, images_root;
  PipelineConfig config;
  std::uint64_t count = 0;
  try {
    fingerprint = header.at("fingerprint").get<std::string>();
    encoder_version = header.at("encoder_version").get<std::string>();
    images_root = header.at("images_root").get<std::string>();
    count = header.at("record_count").get<std::uint64_t>();
    config = parse_config(header.at("config").get<std::string>());
    config.latent_space = LatentSpaceConfig::parse(header.at("latent_space").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::StoreFormatError, std::string("bad store header: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::StoreFormatError, std::string("bad store header: ") + e.what());
  }

  std::vector<PersonFeatureVector> records;
  std::vector<std::string> paths;
  for (std::uint64_t i = 0; i < count; ++i) {
    PersonFeatureVector v;
    v.image_id = r.str32();
    paths.push_back(r.str32());
    const auto mask = r.u8();
    const auto flags = r.u8();
    if (mask >> kNumRegionClasses || flags > 1)
      throw Error(ErrorCode::StoreFormatError, "record " + v.image_id + ": invalid region mask or flags");
    for (auto c : kRegionClasses) {
      if (!(mask & (1u << index_of(c)))) continue;
      RegionColorFeature f;
      for (LabChannel ch : kLabChannels) {
        f.histograms[static_cast<std::size_t>(ch)].channel = ch;
        f.histograms[static_cast<std::size_t>(ch)].bits = r.u64();
      }
      f.representative.L = r.f64();
      f.representative.a = r.f64();
      f.representative.b = r.f64();
      v.regions[index_of(c)] = f;
    }
    if (flags & 1) {
      const double x = r.f64();
      const double y = r.f64();
      v.texture = TexturePoint{x, y};
    }
    records.push_back(std::move(v));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::StoreFormatError, "trailing bytes after the last record");

  try {
    return FeatureStore(std::move(fingerprint), std::move(encoder_version), std::move(config), std::move(images_root),
                        std::move(records), std::move(paths));
  } catch (const Error& e) {
    throw Error(ErrorCode::StoreFormatError, e.what());
  }
}

void FeatureStore::save(const std::string& path) const {
  // Write-then-rename so a crashed build never leaves a torn store behind.
  const std::string tmp = path + ".tmp";
  write_file(tmp, serialize());
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot move " + tmp + " to " + path + ": " + ec.message());
}

FeatureStore FeatureStore::load(const std::string& path, const std::optional<std::string>& expected_fingerprint) {
  FeatureStore store = parse(read_file(path));
  if (expected_fingerprint && *expected_fingerprint != store.fingerprint())
    throw Error(ErrorCode::FingerprintMismatch, path + " was built with fingerprint " + store.fingerprint() +
                                                    ", active configuration has " + *expected_fingerprint);
  return store;
}

IndexBuildResult build_index(const std::string& images_dir, const std::string& masks_dir, const PipelineConfig& cfg,
                             const LabelMapping& mapping, const EncoderModel& encoder) {
  cfg.validate();
  const fs::path root(images_dir);
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, images_dir + " is not a directory");
  if (!fs::is_directory(masks_dir)) throw Error(ErrorCode::IoError, masks_dir + " is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(fs::relative(entry.path(), root));
  std::sort(files.begin(), files.end());

  struct Outcome {
    std::optional<PersonFeatureVector> features;
    SkippedImage skipped;
  };
  std::vector<Outcome> outcomes(files.size());
  detail::parallel_for(files.size(), [&](std::size_t i) {
    const fs::path& rel = files[i];
    fs::path id = rel;
    id.replace_extension();
    try {
      const auto mask = find_mask(masks_dir, rel);
      const auto crop = load_mask(id.generic_string(), read_file((root / rel).string()), read_file(mask), mapping);
      outcomes[i].features = extract_features(crop, cfg, encoder);
    } catch (const Error& e) {
      outcomes[i].skipped = {rel.generic_string(), std::string(error_code_name(e.code())), e.what()};
    }
  }, 4);

  std::vector<PersonFeatureVector> records;
  std::vector<std::string> paths;
  IndexBuildResult result;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (outcomes[i].features) {
      records.push_back(std::move(*outcomes[i].features));
      paths.push_back(files[i].generic_string());
    } else {
      result.skipped.push_back(std::move(outcomes[i].skipped));
    }
  }
  if (records.empty())
    throw Error(ErrorCode::EmptyCorpus, "no image under " + images_dir + " could be indexed (" +
                                            std::to_string(result.skipped.size()) + " skipped)");

  result.store = FeatureStore(extraction_fingerprint(cfg, mapping, encoder.version()), encoder.version(), cfg,
                              fs::absolute(root).lexically_normal().generic_string(), std::move(records),
                              std::move(paths));
  return result;
}

}  // namespace reid
