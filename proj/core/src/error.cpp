#include "ssmkit/error.hpp"

namespace ssmkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Precondition: return "precondition";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::DegenerateInput: return "degenerate input";
    case ErrorCode::DegenerateAxes: return "degenerate axes";
    case ErrorCode::DegenerateGeometry: return "degenerate geometry";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::InsufficientData: return "insufficient data";
    case ErrorCode::RankDeficient: return "rank deficient";
    case ErrorCode::DegenerateRange: return "degenerate range";
    case ErrorCode::MisalignedTraces: return "misaligned traces";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace ssmkit
