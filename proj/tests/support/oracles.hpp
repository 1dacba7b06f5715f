#pragma once

#include <map>
#include <vector>

#include "generators.hpp"
#include "tracekit/comm.hpp"

namespace tkt {

/// Matching, parent and depth recomputed by replaying each stream's events
/// through its own stack, without the library's stream ranges.
struct Pushdown {
  std::vector<RowIndex> matching;
  std::vector<RowIndex> parent;
  std::vector<std::int32_t> depth;
};
Pushdown pushdown_replay(const EventTable& events);

/// Exclusive ns per Enter row from per-nanosecond occupancy: each tick of a
/// stream belongs to the innermost open call.
std::vector<Timestamp> occupancy_exclusive(const EventTable& events);

/// Per-bin exclusive ns per function name, by walking every tick.
std::map<std::string, std::vector<Timestamp>> occupancy_time_profile(const EventTable& events,
                                                                     const std::vector<Timestamp>& edges);

/// Direct O(n^2 m) z-normalized matrix profile.
struct BruteProfile {
  std::vector<double> profile;
  std::vector<std::int64_t> index;
};
BruteProfile brute_matrix_profile(const std::vector<double>& series, std::size_t m, std::size_t exclusion);
double brute_distance(const std::vector<double>& series, std::size_t m, std::size_t i, std::size_t j);

/// Longest-path depth of every step unit by repeated relaxation over the
/// happens-before edges (no topological order).
std::map<std::size_t, std::int64_t> relaxation_steps(Trace& trace);

/// Critical-path DAG: per stream START, step units, END; local and message
/// edges with the waiting-time weights. Exhaustive backward enumeration
/// from the END of the stream holding the last Leave returns the heaviest
/// path's units, preferring the local predecessor on ties.
struct EnumeratedPath {
  std::vector<std::size_t> units;
  Timestamp weight = 0;
  std::size_t paths = 0;
};
EnumeratedPath enumerate_critical_path(Trace& trace);

/// Per-tick comp/comm classification of each process span.
struct Breakdown {
  std::int64_t comp_only = 0;
  std::int64_t overlap = 0;
  std::int64_t comm_only = 0;
  std::int64_t other = 0;
};
std::map<ProcessId, Breakdown> tick_breakdown(Trace& trace, const CommPredicate& is_comm = {});

}  // namespace tkt
