#include "tracekit/error.hpp"

namespace tracekit {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::IoError: return "IoError";
    case Errc::MalformedHeader: return "MalformedHeader";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::MalformedJson: return "MalformedJson";
    case Errc::UnbalancedBE: return "UnbalancedBE";
    case Errc::DuplicateProcess: return "DuplicateProcess";
    case Errc::MismatchedLeave: return "MismatchedLeave";
    case Errc::MissingMetric: return "MissingMetric";
    case Errc::BadBinCount: return "BadBinCount";
    case Errc::NoCommData: return "NoCommData";
    case Errc::CycleDetected: return "CycleDetected";
    case Errc::SeriesTooShort: return "SeriesTooShort";
    case Errc::BadWindow: return "BadWindow";
    case Errc::NoOccurrences: return "NoOccurrences";
    case Errc::BadExpr: return "BadExpr";
    case Errc::TooFewRuns: return "TooFewRuns";
    case Errc::NonSquare: return "NonSquare";
    case Errc::UnmatchedDependency: return "UnmatchedDependency";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace tracekit
