#include "tracekit/trace_model.hpp"

#include <algorithm>
#include <numeric>

#include "tracekit/error.hpp"

namespace tracekit {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Enter: return "Enter";
    case EventKind::Leave: return "Leave";
    case EventKind::Instant: return "Instant";
  }
  return "Instant";
}

std::optional<EventKind> parse_event_kind(std::string_view text) {
  if (text == "Enter") return EventKind::Enter;
  if (text == "Leave") return EventKind::Leave;
  if (text == "Instant") return EventKind::Instant;
  return std::nullopt;
}

std::optional<double> as_number(const AttrValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&value)) return *d;
  return std::nullopt;
}

AttrMap::AttrMap(std::initializer_list<Entry> entries) {
  for (const auto& [k, v] : entries) set(k, v);
}

void AttrMap::set(std::string key, AttrValue value) {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, const std::string& k) { return e.first < k; });
  if (it != entries_.end() && it->first == key) {
    it->second = std::move(value);
  } else {
    entries_.emplace(it, std::move(key), std::move(value));
  }
}

const AttrValue* AttrMap::find(std::string_view key) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                             [](const Entry& e, std::string_view k) { return e.first < k; });
  if (it != entries_.end() && it->first == key) return &it->second;
  return nullptr;
}

NameId StringTable::intern(std::string_view text) {
  if (auto it = ids_.find(text); it != ids_.end()) return it->second;
  auto id = static_cast<NameId>(strings_.size());
  strings_.emplace_back(text);
  ids_.emplace(strings_.back(), id);
  return id;
}

std::optional<NameId> StringTable::find(std::string_view text) const {
  if (auto it = ids_.find(text); it != ids_.end()) return it->second;
  return std::nullopt;
}

void EventTable::reserve(std::size_t n) {
  timestamps_.reserve(n);
  kinds_.reserve(n);
  names_.reserve(n);
  processes_.reserve(n);
  threads_.reserve(n);
  attrs_.reserve(n);
}

void EventTable::append(Timestamp ts, EventKind kind, NameId name, ProcessId process,
                        ThreadId thread, AttrMap attrs) {
  if (ts < 0) throw Error(Errc::InvalidArgument, "negative timestamp " + std::to_string(ts));
  if (name >= strings_.size()) throw Error(Errc::InvalidArgument, "unknown name id");
  timestamps_.push_back(ts);
  kinds_.push_back(kind);
  names_.push_back(name);
  processes_.push_back(process);
  threads_.push_back(thread);
  attrs_.push_back(std::move(attrs));
  derived.clear();
}

void EventTable::append(const Event& event) {
  append(event.timestamp, event.kind, strings_.intern(event.name), event.process, event.thread,
         event.attrs);
}

Event EventTable::event(std::size_t row) const {
  return Event{timestamps_[row], kinds_[row], name(row), processes_[row], threads_[row],
               attrs_[row]};
}

namespace {

template <typename T>
void permute(std::vector<T>& column, const std::vector<std::size_t>& order) {
  std::vector<T> out;
  out.reserve(column.size());
  for (auto i : order) out.push_back(std::move(column[i]));
  column = std::move(out);
}

}  // namespace

bool EventTable::is_sorted() const {
  for (std::size_t i = 1; i < size(); ++i) {
    auto prev = std::tie(processes_[i - 1], threads_[i - 1], timestamps_[i - 1]);
    auto cur = std::tie(processes_[i], threads_[i], timestamps_[i]);
    if (cur < prev) return false;
  }
  return true;
}

void EventTable::sort() {
  if (is_sorted()) return;
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
    return std::tie(processes_[a], threads_[a], timestamps_[a]) <
           std::tie(processes_[b], threads_[b], timestamps_[b]);
  });
  permute(timestamps_, order);
  permute(kinds_, order);
  permute(names_, order);
  permute(processes_, order);
  permute(threads_, order);
  permute(attrs_, order);
  derived.clear();
}

std::vector<std::pair<std::size_t, std::size_t>> EventTable::streams() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= size(); ++i) {
    if (i == size() || processes_[i] != processes_[begin] || threads_[i] != threads_[begin]) {
      out.emplace_back(begin, i);
      begin = i;
    }
  }
  return out;
}

std::vector<ProcessId> EventTable::process_ids() const {
  std::vector<ProcessId> ids(processes_.begin(), processes_.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

bool same_events(const EventTable& a, const EventTable& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.timestamp(i) != b.timestamp(i) || a.kind(i) != b.kind(i) ||
        a.process(i) != b.process(i) || a.thread(i) != b.thread(i) || a.name(i) != b.name(i) ||
        !(a.attrs(i) == b.attrs(i))) {
      return false;
    }
  }
  return true;
}

EventTable sort_events(EventTable events) {
  events.sort();
  return events;
}

CctNodeId Cct::child(CctNodeId parent, NameId name) {
  auto key = std::make_pair(parent, name);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  auto id = static_cast<CctNodeId>(nodes_.size());
  nodes_.push_back(CctNode{id, name, parent, {}});
  if (parent == kNoNode) {
    roots_.push_back(id);
  } else {
    nodes_.at(static_cast<std::size_t>(parent)).children.push_back(id);
  }
  index_.emplace(key, id);
  return id;
}

std::optional<CctNodeId> Cct::find_child(CctNodeId parent, NameId name) const {
  if (auto it = index_.find({parent, name}); it != index_.end()) return it->second;
  return std::nullopt;
}

std::vector<NameId> Cct::path(CctNodeId id) const {
  std::vector<NameId> out;
  for (auto cur = id; cur != kNoNode; cur = node(cur).parent) out.push_back(node(cur).name_id);
  std::reverse(out.begin(), out.end());
  return out;
}

std::pair<Timestamp, Timestamp> time_span(const Trace& trace) {
  const auto& ts = trace.events.timestamps();
  if (ts.empty()) throw Error(Errc::EmptyTrace, "trace has no events");
  auto [lo, hi] = std::minmax_element(ts.begin(), ts.end());
  return {*lo, *hi};
}

void AnalysisTable::add_column(std::string name, std::string unit) {
  if (!row_labels.empty()) {
    throw Error(Errc::InvalidArgument, "columns must be declared before rows");
  }
  columns.push_back(std::move(name));
  units.push_back(std::move(unit));
}

void AnalysisTable::add_row(std::string label, std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw Error(Errc::InvalidArgument, "row '" + label + "' has " + std::to_string(row.size()) +
                                           " cells, expected " + std::to_string(columns.size()));
  }
  row_labels.push_back(std::move(label));
  cells.push_back(std::move(row));
}

std::optional<std::size_t> AnalysisTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> AnalysisTable::row_index(std::string_view label) const {
  for (std::size_t i = 0; i < row_labels.size(); ++i) {
    if (row_labels[i] == label) return i;
  }
  return std::nullopt;
}

double AnalysisTable::number(std::size_t r, std::size_t c) const {
  const auto& cell = at(r, c);
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&cell)) return *d;
  throw Error(Errc::InvalidArgument, "cell is not numeric");
}

}  // namespace tracekit
