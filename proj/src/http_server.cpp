#include "reid/http_server.hpp"

#include <algorithm>
#include <cmath>
#include <httplib.h>

#include "reid/digest.hpp"
#include "reid/error.hpp"

using nlohmann::json;

namespace reid {
namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, std::string_view message) {
  send_json(res, status, error_json(code, message));
}

std::size_t parse_top_k(const json& v, std::size_t fallback) {
  if (v.is_null()) return fallback;
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw Error(ErrorCode::InvalidArgument, "'top_k' must be a positive integer");
  return static_cast<std::size_t>(v.get<long long>());
}

std::size_t parse_top_k(const std::string& v, std::size_t fallback) {
  if (v.empty()) return fallback;
  json parsed;
  try {
    parsed = json::parse(v);
  } catch (const json::exception&) {
    throw Error(ErrorCode::InvalidArgument, "'top_k' must be a positive integer");
  }
  return parse_top_k(parsed, fallback);
}

// Over HTTP only built-in presets are accepted; file paths would expose the
// server's filesystem.
std::optional<std::string> checked_preset(std::string name) {
  if (name.empty()) return std::nullopt;
  if (name == "default") return std::string(kDefaultPreset);
  for (const auto& p : builtin_presets())
    if (p.name == name) return name;
  throw Error(ErrorCode::UnknownPreset, "unknown preset '" + name + "'");
}

}  // namespace

struct HttpServer::Impl {
  const SearchService& service;
  ServerOptions options;
  httplib::Server server;

  Impl(const SearchService& s, ServerOptions o) : service(s), options(o) { routes(); }

  template <class F>
  void guarded(httplib::Response& res, F&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_error(res, http_status_for(e.code()), error_code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "InternalError", e.what());
    }
  }

  json thumbnail(std::size_t index) const {
    const auto& store = service.store();
    const std::string path = store.images_root() + "/" + store.relative_path(index);
    std::vector<std::uint8_t> bytes;
    try {
      bytes = read_file(path);
    } catch (const Error&) {
      return nullptr;
    }
    RgbImage img = decode_image(bytes);
    if (img.height > options.thumbnail_height) {
      const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.width) * options.thumbnail_height /
                                                             img.height)));
      img = resize(img, w, options.thumbnail_height);
    }
    return {{"format", "jpeg"},
            {"width", img.width},
            {"height", img.height},
            {"data", base64_encode(encode_jpeg(img, 85))}};
  }

  void routes() {
    server.set_payload_max_length(options.max_upload_bytes);
    // httplib defaults to SO_REUSEPORT, which lets a second server share the port silently.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      const auto& store = service.store();
      send_json(res, 200,
                {{"status", "ok"},
                 {"fingerprint", store.fingerprint()},
                 {"encoder_version", store.encoder_version()},
                 {"preset", store.config().name},
                 {"record_count", store.size()}});
    });

    server.Get("/presets", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json list = json::array();
        for (const auto& p : builtin_presets()) {
          bool compatible = true;
          try {
            service.resolve(p.name, true);
          } catch (const Error&) {
            compatible = false;
          }
          json weights = json::object();
          const char* keys[] = {"L", "a", "b", "d", "t"};
          for (std::size_t i = 0; i < kNumFeatureChannels; ++i) weights[keys[i]] = p.config.channels.w[i];
          json classes = json::object();
          for (auto c : kRegionClasses) classes[std::string(parser_class_name(c))] = p.config.classes[c];
          list.push_back({{"name", p.name},
                          {"description", p.description},
                          {"smoothing_length", p.config.color.smoothing.length},
                          {"channel_weights", std::move(weights)},
                          {"class_weights", std::move(classes)},
                          {"image_search_compatible", compatible}});
        }
        send_json(res, 200, {{"default", kDefaultPreset}, {"presets", std::move(list)}});
      });
    });

    server.Get(R"(/items/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto index = service.store().find(id);
        if (!index) throw Error(ErrorCode::UnknownItem, "no indexed image with id '" + id + "'");
        const auto& store = service.store();
        json doc = feature_summary_json(store.records()[*index], store.relative_path(*index),
                                        store.config().latent_space);
        doc["thumbnail"] = thumbnail(*index);
        send_json(res, 200, doc);
      });
    });

    server.Post("/search/description", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        json body;
        try {
          body = json::parse(req.body);
        } catch (const json::exception& e) {
          throw Error(ErrorCode::InvalidArgument, std::string("request body is not valid JSON: ") + e.what());
        }
        if (!body.is_object()) throw Error(ErrorCode::InvalidArgument, "request body must be a JSON object");
        for (const auto& [key, value] : body.items())
          if (key != "regions" && key != "channel_weights" && key != "top_k" && key != "preset")
            throw Error(ErrorCode::InvalidArgument, "unknown field '" + key + "'");
        const auto top_k = parse_top_k(body.value("top_k", json()), options.default_top_k);
        std::string preset;
        if (body.contains("preset") && !body["preset"].is_null()) {
          if (!body["preset"].is_string()) throw Error(ErrorCode::InvalidArgument, "'preset' must be a string");
          preset = body["preset"].get<std::string>();
        }
        const auto dq = description_from_json(body);
        send_json(res, 200, response_to_json(service.search_by_description(dq, top_k, checked_preset(preset))));
      });
    });

    server.Post("/search/image", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.is_multipart_form_data())
          throw Error(ErrorCode::InvalidArgument, "expected multipart/form-data with 'image' and 'mask' parts");
        if (!req.has_file("image")) throw Error(ErrorCode::InvalidArgument, "missing 'image' part");
        if (!req.has_file("mask")) throw Error(ErrorCode::MissingMask, "missing 'mask' part");
        const auto& image = req.get_file_value("image").content;
        const auto& mask = req.get_file_value("mask").content;
        const auto top_k =
            parse_top_k(req.has_file("top_k") ? req.get_file_value("top_k").content : std::string(), options.default_top_k);
        const auto preset = checked_preset(req.has_file("preset") ? req.get_file_value("preset").content : std::string());
        auto bytes = [](const std::string& s) {
          return std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
        };
        send_json(res, 200, response_to_json(service.search_by_image(bytes(image), bytes(mask), top_k, preset)));
      });
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        const std::string code = res.status == 404 ? "NotFound" : res.status == 413 ? "PayloadTooLarge" : "HttpError";
        send_error(res, res.status, code, "request failed with HTTP status " + std::to_string(res.status));
      }
    });
  }
};

HttpServer::HttpServer(const SearchService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, options)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw Error(ErrorCode::BindError, "cannot bind to " + host + ":<any>");
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port))
    throw Error(ErrorCode::BindError, "cannot bind to " + host + ":" + std::to_string(port));
  return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace reid
