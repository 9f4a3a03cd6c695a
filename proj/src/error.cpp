#include "reid/error.hpp"

namespace reid {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::ModelLoadError: return "ModelLoadError";
    case ErrorCode::PatchTooSmall: return "PatchTooSmall";
    case ErrorCode::RegionAbsent: return "RegionAbsent";
    case ErrorCode::NoCommonRegions: return "NoCommonRegions";
    case ErrorCode::EmptyGallery: return "EmptyGallery";
    case ErrorCode::LayoutError: return "LayoutError";
    case ErrorCode::FilenameParseError: return "FilenameParseError";
    case ErrorCode::NoValidQueries: return "NoValidQueries";
    case ErrorCode::UnknownColorName: return "UnknownColorName";
    case ErrorCode::EmptyDescription: return "EmptyDescription";
    case ErrorCode::InvalidDescription: return "InvalidDescription";
    case ErrorCode::MissingMask: return "MissingMask";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::FingerprintMismatch: return "FingerprintMismatch";
    case ErrorCode::StoreFormatError: return "StoreFormatError";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::BindError: return "BindError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace reid
