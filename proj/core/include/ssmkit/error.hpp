#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ssmkit {

enum class ErrorCode {
  Precondition,
  Domain,
  DegenerateInput,
  DegenerateAxes,
  DegenerateGeometry,
  Unreachable,
  InsufficientData,
  RankDeficient,
  DegenerateRange,
  MisalignedTraces,
  Parse,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the toolkit; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ssmkit
