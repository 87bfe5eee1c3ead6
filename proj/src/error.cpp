#include "tatraj/error.hpp"

namespace tatraj {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnknownRawCode: return "UnknownRawCode";
    case Errc::CoverageGap: return "CoverageGap";
    case Errc::OverlapError: return "OverlapError";
    case Errc::InvalidEvent: return "InvalidEvent";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidModel: return "InvalidModel";
    case Errc::InvalidN: return "InvalidN";
    case Errc::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case Errc::DomainError: return "DomainError";
    case Errc::OutsideSimplex: return "OutsideSimplex";
    case Errc::InvalidAlpha: return "InvalidAlpha";
    case Errc::NonInteriorY: return "NonInteriorY";
    case Errc::NonFiniteAlpha: return "NonFiniteAlpha";
    case Errc::RankDeficientDesign: return "RankDeficientDesign";
    case Errc::NotConverged: return "NotConverged";
    case Errc::CovariateMismatch: return "CovariateMismatch";
    case Errc::UnmappedCategory: return "UnmappedCategory";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::DegenerateGroup: return "DegenerateGroup";
    case Errc::AllZeroTriple: return "AllZeroTriple";
    case Errc::ParseError: return "ParseError";
    case Errc::CommunityMismatch: return "CommunityMismatch";
    case Errc::MissingCovariate: return "MissingCovariate";
    case Errc::ConfigError: return "ConfigError";
    case Errc::IOError: return "IOError";
  }
  return "Unknown";
}

}  // namespace tatraj
