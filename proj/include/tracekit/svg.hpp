#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracekit/diagnostics.hpp"
#include "tracekit/patterns.hpp"
#include "tracekit/trace_model.hpp"

namespace tracekit {

/// Stable color for a function name: FNV-1a hash into a 20-color palette.
std::string_view color_for(std::string_view name);

struct TimelineOptions {
  /// Visible window; defaults to the trace span. Calls are clipped to it.
  std::optional<std::pair<Timestamp, Timestamp>> range;
  bool arrows = false;
  const CriticalPath* path = nullptr;
  std::vector<Span> spans;
  /// Beyond this many bars the shortest are dropped.
  std::size_t max_events = 50000;
  /// Receives a one-line summary when bars are dropped.
  std::ostream* log = nullptr;
};

/// Calls as bars in one lane per (process, thread, depth), instants as
/// diamonds, optional message arrows, iteration spans and a critical-path
/// polyline drawn above the bars. Throws EmptyTrace.
std::string render_timeline(Trace& trace, const TimelineOptions& options = {});

enum class Colormap { Linear, Log };

/// Square numeric table as a grid; zero cells keep the background color.
/// Throws NonSquare.
std::string render_heatmap(const AnalysisTable& table, Colormap colormap = Colormap::Linear);

/// One stack per row with one segment per column, heights proportional to
/// the cells (negative cells draw nothing), plus a legend keyed by column.
std::string render_stacked_bars(const AnalysisTable& table, std::string_view title = {});

}  // namespace tracekit
