#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

namespace tracekit {

/// Nanoseconds since the trace epoch.
using Timestamp = std::int64_t;
using RowIndex = std::int64_t;
using NameId = std::uint32_t;
using ProcessId = std::uint32_t;
using ThreadId = std::uint32_t;
using CctNodeId = std::int64_t;

inline constexpr RowIndex kNoRow = -1;
inline constexpr CctNodeId kNoNode = -1;

enum class EventKind : std::uint8_t { Enter, Leave, Instant };

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view text);

using AttrValue = std::variant<std::int64_t, double, std::string>;

/// Numeric view of an attribute; strings yield nullopt.
std::optional<double> as_number(const AttrValue& value);

/// Sparse key -> value map kept sorted by key. Most events carry no
/// attributes, so an empty map costs one vector header.
class AttrMap {
 public:
  using Entry = std::pair<std::string, AttrValue>;

  AttrMap() = default;
  AttrMap(std::initializer_list<Entry> entries);

  void set(std::string key, AttrValue value);
  const AttrValue* find(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const AttrMap&, const AttrMap&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Interns strings into dense ids. Ids are assigned in first-seen order.
class StringTable {
 public:
  NameId intern(std::string_view text);
  std::optional<NameId> find(std::string_view text) const;
  const std::string& resolve(NameId id) const { return strings_.at(id); }
  std::size_t size() const { return strings_.size(); }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> strings_;
  std::unordered_map<std::string, NameId, Hash, std::equal_to<>> ids_;
};

/// Row-builder view of one event; the table itself is columnar.
struct Event {
  Timestamp timestamp = 0;
  EventKind kind = EventKind::Instant;
  std::string name;
  ProcessId process = 0;
  ThreadId thread = 0;
  AttrMap attrs;
};

/// Columns computed from the base columns on demand. Each one is absent
/// until materialized; all are sized to the row count once present.
struct DerivedColumns {
  std::optional<std::vector<RowIndex>> matching_index;
  std::optional<std::vector<RowIndex>> parent_index;
  std::optional<std::vector<std::int32_t>> depth;
  std::optional<std::vector<CctNodeId>> cct_node_id;
  /// Time metrics; defined on Enter rows, zero elsewhere.
  std::optional<std::vector<Timestamp>> inc_ns;
  std::optional<std::vector<Timestamp>> exc_ns;
  /// Attribute metrics keyed by attribute name; NaN off Enter rows.
  std::map<std::string, std::vector<double>> inc_attr;
  std::map<std::string, std::vector<double>> exc_attr;
  /// Happens-before step per row; -1 on rows outside any step unit.
  std::optional<std::vector<std::int64_t>> logical_step;

  bool any() const {
    return matching_index || parent_index || depth || cct_node_id || inc_ns || exc_ns ||
           !inc_attr.empty() || !exc_attr.empty() || logical_step;
  }
  void clear() {
    if (any()) *this = DerivedColumns{};
  }
};

/// Column store of trace events. Rows are kept in (process, thread,
/// timestamp) order once `sort()` has run; ties keep insertion order.
class EventTable {
 public:
  std::size_t size() const { return timestamps_.size(); }
  bool empty() const { return timestamps_.empty(); }
  void reserve(std::size_t n);

  void append(Timestamp ts, EventKind kind, NameId name, ProcessId process, ThreadId thread,
              AttrMap attrs = {});
  void append(const Event& event);

  /// Stable sort by (process, thread, timestamp). Drops derived columns when
  /// the order changes.
  void sort();
  bool is_sorted() const;

  StringTable& strings() { return strings_; }
  const StringTable& strings() const { return strings_; }

  Timestamp timestamp(std::size_t row) const { return timestamps_[row]; }
  EventKind kind(std::size_t row) const { return kinds_[row]; }
  NameId name_id(std::size_t row) const { return names_[row]; }
  const std::string& name(std::size_t row) const { return strings_.resolve(names_[row]); }
  ProcessId process(std::size_t row) const { return processes_[row]; }
  ThreadId thread(std::size_t row) const { return threads_[row]; }
  const AttrMap& attrs(std::size_t row) const { return attrs_[row]; }
  Event event(std::size_t row) const;

  std::span<const Timestamp> timestamps() const { return timestamps_; }
  std::span<const EventKind> kinds() const { return kinds_; }
  std::span<const NameId> name_ids() const { return names_; }
  std::span<const ProcessId> processes() const { return processes_; }
  std::span<const ThreadId> threads() const { return threads_; }
  std::span<const AttrMap> all_attrs() const { return attrs_; }

  /// Row ranges [begin, end) of each (process, thread) stream, in row order.
  /// Requires a sorted table.
  std::vector<std::pair<std::size_t, std::size_t>> streams() const;

  /// Sorted distinct process ids present.
  std::vector<ProcessId> process_ids() const;

  DerivedColumns derived;

 private:
  std::vector<Timestamp> timestamps_;
  std::vector<EventKind> kinds_;
  std::vector<NameId> names_;
  std::vector<ProcessId> processes_;
  std::vector<ThreadId> threads_;
  std::vector<AttrMap> attrs_;
  StringTable strings_;
};

/// Base-column equality: same rows in the same order with the same resolved
/// names and attributes. Name ids may differ between the tables.
bool same_events(const EventTable& a, const EventTable& b);

EventTable sort_events(EventTable events);

struct CctNode {
  CctNodeId id = kNoNode;
  NameId name_id = 0;
  CctNodeId parent = kNoNode;
  std::vector<CctNodeId> children;
};

/// Calling context forest: one root per distinct top-level function, no two
/// siblings with the same name.
class Cct {
 public:
  /// Returns the child of `parent` (kNoNode for a root) named `name`,
  /// creating it on first use.
  CctNodeId child(CctNodeId parent, NameId name);
  std::optional<CctNodeId> find_child(CctNodeId parent, NameId name) const;

  const CctNode& node(CctNodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<CctNode>& nodes() const { return nodes_; }
  const std::vector<CctNodeId>& roots() const { return roots_; }
  std::size_t size() const { return nodes_.size(); }

  /// Names along the path from a root to `id`.
  std::vector<NameId> path(CctNodeId id) const;

 private:
  std::vector<CctNode> nodes_;
  std::vector<CctNodeId> roots_;
  std::map<std::pair<CctNodeId, NameId>, CctNodeId> index_;
};

struct Trace {
  EventTable events;
  std::optional<Cct> cct;
  std::map<std::string, std::string> metadata;
};

/// (t_min, t_max) over all events. Throws EmptyTrace.
std::pair<Timestamp, Timestamp> time_span(const Trace& trace);

using Cell = std::variant<std::int64_t, double, std::string>;

/// Labeled rectangular result of an aggregation.
struct AnalysisTable {
  std::string row_key = "label";
  std::vector<std::string> row_labels;
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<Cell>> cells;

  std::size_t rows() const { return row_labels.size(); }
  std::size_t cols() const { return columns.size(); }

  void add_column(std::string name, std::string unit = "");
  /// Throws InvalidArgument unless `row` has one cell per column.
  void add_row(std::string label, std::vector<Cell> row);

  const Cell& at(std::size_t r, std::size_t c) const { return cells.at(r).at(c); }
  std::optional<std::size_t> column_index(std::string_view name) const;
  std::optional<std::size_t> row_index(std::string_view label) const;
  /// Numeric value of a cell; strings throw InvalidArgument.
  double number(std::size_t r, std::size_t c) const;
};

}  // namespace tracekit
