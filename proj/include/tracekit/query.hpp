#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tracekit/callgraph.hpp"
#include "tracekit/trace_model.hpp"

namespace tracekit {

enum class Field { Name, Process, Thread, Timestamp, EventType, Attr };
enum class Op { Eq, Ne, Lt, Le, Gt, Ge, In, Between, Glob };

/// Boolean predicate over events: atoms (field op operand) combined with
/// &&, || and !. Evaluation never fails; an absent attribute, or one whose
/// type does not fit the operand, makes every comparison false.
class FilterExpr {
 public:
  /// Field spec: name, process, thread, timestamp, event_type or
  /// attr:<key>. Throws BadExpr on unknown fields, operand types that do
  /// not fit the field, or a wrong operand count (In needs >= 1, Between 2,
  /// the rest 1).
  static FilterExpr atom(std::string_view field, Op op, std::vector<AttrValue> operands);

  friend FilterExpr operator&&(const FilterExpr& a, const FilterExpr& b);
  friend FilterExpr operator||(const FilterExpr& a, const FilterExpr& b);
  friend FilterExpr operator!(const FilterExpr& a);

  /// Value of the predicate on one row. Given the [enter, leave] interval
  /// of the row's call, a `timestamp between [lo, hi)` atom tests that
  /// interval for intersection with the window; otherwise it tests the
  /// row's own timestamp.
  bool evaluate(const EventTable& events, std::size_t row,
                std::optional<std::pair<Timestamp, Timestamp>> call = std::nullopt) const;

  /// First `timestamp between` window in the tree, left to right.
  std::optional<std::pair<Timestamp, Timestamp>> time_window() const;

  std::string to_string() const;

  struct Node;

 private:
  explicit FilterExpr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

FilterExpr compare(std::string_view field, Op op, AttrValue value);
FilterExpr in_set(std::string_view field, std::vector<AttrValue> values);
FilterExpr between(std::string_view field, AttrValue lo, AttrValue hi);
FilterExpr glob(std::string_view field, std::string pattern);

/// Parses the textual filter language, e.g.
/// `name == "MPI_Recv" && process in [0,4] && time between [1e9, 2e9]`.
/// Throws BadExpr with the offending position.
FilterExpr parse_filter(std::string_view text);

struct FilterOptions {
  /// Keep both rows of a call when either matches.
  bool pair_preserving = true;
  /// Clamp kept calls to the first time window and tag them `clipped=1`.
  bool time_clip = false;
};

/// New trace holding the events that satisfy `expr`. The source is never
/// modified; derived columns of the result start empty. When `expr` holds a
/// time window, instants inside a dropped call are dropped too.
Trace filter(const Trace& trace, const FilterExpr& expr, const FilterOptions& options = {});

struct MultiRunOptions {
  Metric metric;
  /// Column labels; defaults to each run's process count.
  std::vector<std::string> labels;
};

/// functions x runs of flat-profile values, zero where a run lacks the
/// function, rows ordered by their max across runs descending. Throws
/// TooFewRuns with fewer than two traces.
AnalysisTable multi_run_analysis(std::vector<Trace>& traces, const MultiRunOptions& options = {});

}  // namespace tracekit
