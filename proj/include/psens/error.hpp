#ifndef PSENS_ERROR_HPP
#define PSENS_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace psens {

enum class ErrorCode {
  InvalidSample,
  EmptySample,
  DegenerateSample,
  InvalidPartition,
  PartitionTooFine,
  Dimension,
  Domain,
  Size,
  Matrix,
  Unsupported,
  NoOracle,
  Parse,
  Config,
  Io,
};

// Every failure raised by the library carries a code so the CLI can map it to
// a structured message without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSample: return "invalid-sample";
    case ErrorCode::EmptySample: return "empty-sample";
    case ErrorCode::DegenerateSample: return "degenerate-sample";
    case ErrorCode::InvalidPartition: return "invalid-partition";
    case ErrorCode::PartitionTooFine: return "partition-too-fine";
    case ErrorCode::Dimension: return "dimension";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Size: return "size";
    case ErrorCode::Matrix: return "matrix";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::NoOracle: return "no-oracle";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace psens

#endif  // PSENS_ERROR_HPP
