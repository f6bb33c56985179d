#pragma once

#include <stdexcept>
#include <string>

namespace scorebin {

enum class ErrorCode {
  FileNotFound,
  UnsupportedFormat,
  MalformedFile,
  IoError,
  FormatMismatch,
  EmptyImage,
  RectOutOfBounds,
  DimensionMismatch,
  InvalidParam,
  EmptyTexture,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatMismatch: return "FormatMismatch";
    case ErrorCode::EmptyImage: return "EmptyImage";
    case ErrorCode::RectOutOfBounds: return "RectOutOfBounds";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidParam: return "InvalidParam";
    case ErrorCode::EmptyTexture: return "EmptyTexture";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace scorebin
