#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracekit {

enum class Errc {
  EmptyTrace,
  IoError,
  MalformedHeader,
  MalformedRow,
  MalformedJson,
  UnbalancedBE,
  DuplicateProcess,
  MismatchedLeave,
  MissingMetric,
  BadBinCount,
  NoCommData,
  CycleDetected,
  UnmatchedDependency,
  SeriesTooShort,
  BadWindow,
  NoOccurrences,
  BadExpr,
  TooFewRuns,
  NonSquare,
  InvalidArgument,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library. `code()` identifies the condition;
/// `what()` carries the human-readable detail (row numbers, ranks, ...).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace tracekit
