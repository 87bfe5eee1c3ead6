#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tatraj {

// Error conditions raised by the library. Each value names the failure a
// caller can act on; the message carries the detail.
enum class Errc {
  UnknownRawCode,
  CoverageGap,
  OverlapError,
  InvalidEvent,
  EmptyInput,
  InvalidModel,
  InvalidN,
  EpsilonOutOfRange,
  DomainError,
  OutsideSimplex,
  InvalidAlpha,
  NonInteriorY,
  NonFiniteAlpha,
  RankDeficientDesign,
  NotConverged,
  CovariateMismatch,
  UnmappedCategory,
  TooFewPoints,
  ZeroVariance,
  DegenerateGroup,
  AllZeroTriple,
  ParseError,
  CommunityMismatch,
  MissingCovariate,
  ConfigError,
  IOError,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tatraj
