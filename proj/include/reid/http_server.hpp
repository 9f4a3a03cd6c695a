#pragma once

#include <memory>
#include <string>

#include "reid/search_service.hpp"

namespace reid {

struct ServerOptions {
  std::size_t default_top_k = 10;
  int thumbnail_height = 128;
  std::size_t max_upload_bytes = 16 * 1024 * 1024;
};

/// HTTP/1.1 JSON API over a SearchService:
///   GET  /health              status, fingerprint, record count
///   GET  /presets             built-in presets and whether each fits the store
///   GET  /items/{image_id}    base64 JPEG thumbnail plus feature summary
///   POST /search/description  description document + optional top_k, preset
///   POST /search/image        multipart: image, mask, optional top_k, preset
/// Errors are {"error": {"code", "message"}} with a 4xx status.
class HttpServer {
 public:
  explicit HttpServer(const SearchService& service, ServerOptions options = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds to host:port (port 0 picks a free port) and returns the bound port.
  /// Throws BindError.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  void run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace reid
