#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tracekit/callgraph.hpp"
#include "tracekit/trace_model.hpp"

namespace tracekit {

struct ImbalanceOptions {
  Metric metric;
  std::size_t top_k = 3;
};

/// Per function: total, max-over-ranks / mean-over-ranks (ranks absent from
/// the function count as 0), and the top-k loaded ranks as a comma list.
/// Rows are sorted by total descending.
AnalysisTable load_imbalance(Trace& trace, const ImbalanceOptions& options = {});

struct IdleOptions {
  std::vector<std::string> idle_names{"MPI_Recv", "MPI_Wait", "MPI_Waitall", "MPI_Waitany",
                                      "MPI_Barrier"};
  std::size_t k = 5;
};

struct IdleResult {
  AnalysisTable all;
  AnalysisTable most_idle;
  AnalysisTable least_idle;
};

/// Inclusive time of maximal idle calls (those without an idle ancestor)
/// per process.
IdleResult idle_time(Trace& trace, const IdleOptions& options = {});

/// Rows that receive a logical step directly: every Instant, and every Enter
/// with no child events. In each stream they are sequential and
/// non-overlapping. Requires matching.
std::vector<std::size_t> step_units(const EventTable& events);

/// End time of a step unit: the Leave timestamp of a call, the timestamp of
/// an instant.
Timestamp unit_end(const EventTable& events, std::size_t row);

/// Fills derived.logical_step with the longest-path depth of each unit in
/// the happens-before graph (stream order plus matched messages). Calls
/// with children take the max step of their descendants; Leave rows copy
/// their Enter. Throws CycleDetected when the graph has a cycle or a
/// message is received before it is sent.
Trace& assign_logical_steps(Trace& trace);

struct LatenessResult {
  /// One row per step unit: process, thread, name, step, end_ns, lateness_ns.
  AnalysisTable events;
  /// max_lateness_ns per process.
  AnalysisTable per_process;
};

/// lateness(u) = end(u) - min end over units sharing u's step.
LatenessResult calculate_lateness(Trace& trace);

enum class SegmentKind { Local, MessageHop };

struct PathSegment {
  ProcessId process = 0;
  ThreadId thread = 0;
  std::size_t event_row = 0;
  Timestamp t_start = 0;
  Timestamp t_end = 0;
  SegmentKind kind = SegmentKind::Local;
};

struct CriticalPath {
  /// Forward order; contiguous in time, each t_start equal to the previous
  /// t_end. Hops are zero-length and sit on the sender.
  std::vector<PathSegment> segments;
  /// Step units on the path in forward order.
  std::vector<std::size_t> units;
  /// Set when the walk stopped at a receive with no matched send.
  std::optional<std::size_t> unmatched_recv;

  bool truncated() const { return unmatched_recv.has_value(); }
  Timestamp length() const;
  std::size_t hops() const;
  /// Distinct processes in first-visit order.
  std::vector<ProcessId> processes() const;
};

struct CriticalPathOptions {
  /// Throw UnmatchedDependency instead of truncating.
  bool strict = false;
};

/// Walks back from the globally last Leave. On reaching a matched receive
/// whose send happened strictly after the previous local unit ended, the
/// walk hops to the sender; otherwise it stays local. Collectives are
/// ordinary local calls.
CriticalPath critical_path_analysis(Trace& trace, const CriticalPathOptions& options = {});

AnalysisTable critical_path_table(const Trace& trace, const CriticalPath& path);

}  // namespace tracekit
