#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace brightfuse {

enum class ErrorKind {
  kIo,
  kFormat,
  kSchema,
  kMonotonicity,
  kInvalidArgument,  // bad level count, radius, channel or dimension mismatch
  kInsufficientImages,
  kSingularSystem,
  kMagicMismatch,
  kShapeChain,
  kVersionUnsupported,
  kUsage,
};

/// Every failure raised by the library carries one of the kinds above so the
/// CLI can map it to a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io-error";
    case ErrorKind::kFormat: return "format-error";
    case ErrorKind::kSchema: return "schema-error";
    case ErrorKind::kMonotonicity: return "monotonicity-error";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInsufficientImages: return "insufficient-images";
    case ErrorKind::kSingularSystem: return "singular-system";
    case ErrorKind::kMagicMismatch: return "magic-mismatch";
    case ErrorKind::kShapeChain: return "shape-chain-error";
    case ErrorKind::kVersionUnsupported: return "version-unsupported";
    case ErrorKind::kUsage: return "usage-error";
  }
  return "unknown-error";
}

/// Process exit status: 0 success, 2 usage, 3 io, 4 format/schema,
/// 5 numeric/degenerate.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kInvalidArgument:
      return 2;
    case ErrorKind::kIo:
      return 3;
    case ErrorKind::kFormat:
    case ErrorKind::kSchema:
    case ErrorKind::kMonotonicity:
    case ErrorKind::kMagicMismatch:
    case ErrorKind::kShapeChain:
    case ErrorKind::kVersionUnsupported:
      return 4;
    case ErrorKind::kInsufficientImages:
    case ErrorKind::kSingularSystem:
      return 5;
  }
  return 1;
}

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace brightfuse
