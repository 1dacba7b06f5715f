#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tracekit/callgraph.hpp"
#include "tracekit/intervals.hpp"
#include "tracekit/trace_model.hpp"

namespace tracekit {

enum class GroupBy {
  Name,      // function name
  CallPath,  // full calling context, `/`-joined
};

struct FlatProfileOptions {
  Metric metric;
  GroupBy group_by = GroupBy::Name;
  /// Adds one column per rank ("P<rank>") before the "total" column.
  bool per_process = false;
};

/// Sum of a per-call metric over every call of each group, sorted by value
/// descending (ties by name). Throws EmptyTrace.
AnalysisTable flat_profile(Trace& trace, const FlatProfileOptions& options = {});

inline constexpr std::size_t kDefaultBins = 100;

struct TimeProfileOptions {
  std::size_t bins = kDefaultBins;
  /// Bin inclusive call intervals instead of exclusive ones.
  bool inclusive = false;
  /// Restrict to these functions; empty keeps all.
  std::vector<std::string> functions;
};

/// bins x functions: time each function spent (exclusively by default) in
/// each equal-width bin of [t_min, t_max], summed over all streams. Throws
/// BadBinCount for zero bins.
AnalysisTable time_profile(Trace& trace, const TimeProfileOptions& options = {});

/// B+1 monotone integer edges splitting [lo, hi] into `bins` near-equal
/// parts; bins are [e_k, e_k+1) except the last, which is closed.
std::vector<Timestamp> bin_edges(Timestamp lo, Timestamp hi, std::size_t bins);

/// Index of the bin containing `t` (clamped into [0, bins)).
std::size_t bin_of(const std::vector<Timestamp>& edges, Timestamp t);

/// Intervals where the call starting at Enter row `row` is the innermost
/// active call: its inclusive interval minus its children's.
std::vector<IntervalSet::Interval> exclusive_intervals(
    const EventTable& events, const std::vector<std::vector<std::size_t>>& children, std::size_t row);

}  // namespace tracekit
