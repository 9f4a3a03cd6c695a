#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reid {

/// Machine-readable error kinds. The string form (error_code_name) is what
/// the HTTP API and CLI report.
enum class ErrorCode {
  // mask-ingest
  DimensionMismatch,
  UnknownLabel,
  DecodeError,
  // color-features
  EmptyRegion,
  // texture-space
  ModelLoadError,
  PatchTooSmall,
  // similarity-engine
  RegionAbsent,
  NoCommonRegions,
  EmptyGallery,
  // eval-harness
  LayoutError,
  FilenameParseError,
  NoValidQueries,
  // query-builder
  UnknownColorName,
  EmptyDescription,
  InvalidDescription,
  // service
  MissingMask,
  EmptyCorpus,
  FingerprintMismatch,
  StoreFormatError,
  UnknownPreset,
  UnknownItem,
  BindError,
  // shared
  ConfigError,
  IoError,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace reid
