#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qacor {

enum class Errc {
  NotSquare,
  NonFinite,
  NotSymmetric,
  NotHollow,
  NotCorrelation,
  NonSpdInput,
  DimensionMismatch,
  DimensionTooSmall,
  InvalidMetricParams,
  OutOfDomain,
  DegeneratePlane,
  ParseError,
  EigFailure,
  LinearSolveFailure,
  NonSpdResult,
  NonPositiveEntry,
  NoConvergence,
};

constexpr std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::NotSquare: return "NotSquare";
    case Errc::NonFinite: return "NonFinite";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NotHollow: return "NotHollow";
    case Errc::NotCorrelation: return "NotCorrelation";
    case Errc::NonSpdInput: return "NonSpdInput";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DimensionTooSmall: return "DimensionTooSmall";
    case Errc::InvalidMetricParams: return "InvalidMetricParams";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::DegeneratePlane: return "DegeneratePlane";
    case Errc::ParseError: return "ParseError";
    case Errc::EigFailure: return "EigFailure";
    case Errc::LinearSolveFailure: return "LinearSolveFailure";
    case Errc::NonSpdResult: return "NonSpdResult";
    case Errc::NonPositiveEntry: return "NonPositiveEntry";
    case Errc::NoConvergence: return "NoConvergence";
  }
  return "Unknown";
}

// Invalid inputs, as opposed to failures of a numerical method on valid ones.
constexpr bool is_validation_error(Errc e) {
  switch (e) {
    case Errc::NotSquare:
    case Errc::NonFinite:
    case Errc::NotSymmetric:
    case Errc::NotHollow:
    case Errc::NotCorrelation:
    case Errc::NonSpdInput:
    case Errc::DimensionMismatch:
    case Errc::DimensionTooSmall:
    case Errc::InvalidMetricParams:
    case Errc::OutOfDomain:
    case Errc::DegeneratePlane:
    case Errc::ParseError:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace qacor
