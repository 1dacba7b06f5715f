#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tracekit/trace_model.hpp"

namespace tracekit {

struct MatchOptions {
  /// Strict: a Leave that does not close the innermost open call throws
  /// MismatchedLeave. Lenient: frames above a matching ancestor are closed
  /// with synthetic Leaves, unmatched Leaves are left as orphans, and both
  /// are counted in metadata.
  bool strict = false;
  /// Lenient only: when false, nothing is synthesized and unclosed Enters
  /// and crossed Leaves stay unmatched.
  bool repair = true;
};

/// Pairs Enter/Leave rows per (process, thread) with a call stack and
/// materializes matching_index, parent_index and depth. Calls still open at
/// the end of a stream are closed by synthetic Leaves at the trace's t_max,
/// flagged with attr `synthetic_leave=1`. The default options come from
/// metadata["matching"] ("strict" or lenient).
Trace& match_caller_callee(Trace& trace);
Trace& match_caller_callee(Trace& trace, const MatchOptions& options);

/// Builds the calling context forest as the union of every call path over
/// all processes, threads and time, and fills the cct_node_id column.
Trace& create_cct(Trace& trace);

/// `metric` is "time" (or "timestamp") for inc_ns, otherwise the name of a
/// numeric attribute present on both ends of every call.
Trace& calc_inc_metrics(Trace& trace, std::string_view metric = "time");
Trace& calc_exc_metrics(Trace& trace, std::string_view metric = "time");

void ensure_matching(Trace& trace);
void ensure_time_metrics(Trace& trace);

/// Metric selector used by the aggregations: exclusive or inclusive time
/// (`exc_ns`, `inc_ns`) or an attribute (`exc:<attr>`, `inc:<attr>`).
struct Metric {
  std::string attr;  // empty for time
  bool inclusive = false;

  bool is_time() const { return attr.empty(); }
  std::string label() const;
};

Metric parse_metric(std::string_view text);
void ensure_metric(Trace& trace, const Metric& metric);

/// Row indices of the direct child calls (Enter rows) of every Enter row.
std::vector<std::vector<std::size_t>> child_calls(const EventTable& events);

}  // namespace tracekit
