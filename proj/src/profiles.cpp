#include "tracekit/profiles.hpp"

#include <algorithm>
#include <map>

#include "tracekit/error.hpp"

namespace tracekit {

namespace {

std::string call_path(const Trace& trace, std::size_t row) {
  const auto& t = trace.events;
  std::string path;
  for (auto node : trace.cct->path((*t.derived.cct_node_id)[row])) {
    if (!path.empty()) path.push_back('/');
    path += t.strings().resolve(node);
  }
  return path;
}

template <typename Value>
AnalysisTable build_flat(Trace& trace, const std::vector<Value>& column, const FlatProfileOptions& options) {
  const auto& t = trace.events;
  const auto ranks = t.process_ids();
  std::map<ProcessId, std::size_t> rank_col;
  for (std::size_t r = 0; r < ranks.size(); ++r) rank_col[ranks[r]] = r;

  struct Row {
    Value total{};
    std::vector<Value> per_rank;
  };
  std::map<std::string, Row> groups;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Enter) continue;
    auto key = options.group_by == GroupBy::Name ? t.name(i) : call_path(trace, i);
    auto& row = groups[key];
    if (row.per_rank.empty()) row.per_rank.assign(ranks.size(), Value{});
    row.total += column[i];
    row.per_rank[rank_col[t.process(i)]] += column[i];
  }

  std::vector<std::pair<std::string, Row>> ordered(groups.begin(), groups.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.second.total > b.second.total; });

  AnalysisTable table;
  table.row_key = options.group_by == GroupBy::Name ? "name" : "path";
  const std::string unit = options.metric.is_time() ? "ns" : options.metric.attr;
  if (options.per_process) {
    for (auto r : ranks) table.add_column("P" + std::to_string(r), unit);
    table.add_column("total", unit);
  } else {
    table.add_column(options.metric.label(), unit);
  }
  for (auto& [name, row] : ordered) {
    std::vector<Cell> cells;
    if (options.per_process) {
      for (auto v : row.per_rank) cells.emplace_back(v);
    }
    cells.emplace_back(row.total);
    table.add_row(name, std::move(cells));
  }
  return table;
}

}  // namespace

AnalysisTable flat_profile(Trace& trace, const FlatProfileOptions& options) {
  if (trace.events.empty()) throw Error(Errc::EmptyTrace, "flat_profile on an empty trace");
  ensure_metric(trace, options.metric);
  if (options.group_by == GroupBy::CallPath && !trace.events.derived.cct_node_id) create_cct(trace);
  const auto& d = trace.events.derived;
  const auto& m = options.metric;
  if (m.is_time()) return build_flat(trace, m.inclusive ? *d.inc_ns : *d.exc_ns, options);
  const auto& column = m.inclusive ? d.inc_attr.at(m.attr) : d.exc_attr.at(m.attr);
  // NaN marks non-Enter rows, which build_flat never reads.
  return build_flat(trace, column, options);
}

// span * k overflows 64 bits for spans near the full timestamp range.
__extension__ using Wide = __int128;

std::vector<Timestamp> bin_edges(Timestamp lo, Timestamp hi, std::size_t bins) {
  if (bins == 0) throw Error(Errc::BadBinCount, "bin count must be at least 1");
  std::vector<Timestamp> edges(bins + 1);
  const Wide span = static_cast<Wide>(hi) - lo;
  for (std::size_t k = 0; k <= bins; ++k) {
    edges[k] = lo + static_cast<Timestamp>(span * static_cast<Wide>(k) / static_cast<Wide>(bins));
  }
  return edges;
}

std::size_t bin_of(const std::vector<Timestamp>& edges, Timestamp t) {
  const auto bins = edges.size() - 1;
  auto it = std::upper_bound(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(bins), t);
  if (it == edges.begin()) return 0;
  return static_cast<std::size_t>(it - edges.begin()) - 1;
}

std::vector<IntervalSet::Interval> exclusive_intervals(
    const EventTable& events, const std::vector<std::vector<std::size_t>>& children, std::size_t row) {
  const auto& matching = *events.derived.matching_index;
  std::vector<IntervalSet::Interval> out;
  auto cur = events.timestamp(row);
  for (auto c : children[row]) {
    if (events.timestamp(c) > cur) out.emplace_back(cur, events.timestamp(c));
    cur = std::max(cur, events.timestamp(static_cast<std::size_t>(matching[c])));
  }
  const auto end = events.timestamp(static_cast<std::size_t>(matching[row]));
  if (end > cur) out.emplace_back(cur, end);
  return out;
}

AnalysisTable time_profile(Trace& trace, const TimeProfileOptions& options) {
  if (options.bins == 0) throw Error(Errc::BadBinCount, "bin count must be at least 1");
  ensure_time_metrics(trace);
  const auto& t = trace.events;
  const auto [t_min, t_max] = time_span(trace);
  const auto edges = bin_edges(t_min, t_max, options.bins);
  const auto bins = options.bins;

  // Column order follows the flat profile of the same time metric.
  FlatProfileOptions flat;
  flat.metric.inclusive = options.inclusive;
  const auto totals = flat_profile(trace, flat);
  std::vector<std::string> functions;
  for (const auto& name : totals.row_labels) {
    if (options.functions.empty() ||
        std::find(options.functions.begin(), options.functions.end(), name) != options.functions.end()) {
      functions.push_back(name);
    }
  }
  std::map<NameId, std::size_t> column_of;
  for (std::size_t f = 0; f < functions.size(); ++f) {
    if (auto id = t.strings().find(functions[f])) column_of[*id] = f;
  }

  std::vector<std::vector<std::int64_t>> cells(bins, std::vector<std::int64_t>(functions.size(), 0));
  auto deposit = [&](std::size_t f, Timestamp a, Timestamp b) {
    auto k = bin_of(edges, a);
    while (a < b) {
      const auto hi = k + 1 == bins ? b : std::min(b, edges[k + 1]);
      cells[k][f] += hi - a;
      a = hi;
      ++k;
    }
  };

  const auto& matching = *t.derived.matching_index;
  const auto children = child_calls(t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Enter || matching[i] == kNoRow) continue;
    auto col = column_of.find(t.name_id(i));
    if (col == column_of.end()) continue;
    if (options.inclusive) {
      deposit(col->second, t.timestamp(i), t.timestamp(static_cast<std::size_t>(matching[i])));
    } else {
      for (auto [a, b] : exclusive_intervals(t, children, i)) deposit(col->second, a, b);
    }
  }

  AnalysisTable table;
  table.row_key = "bin_start_ns";
  for (const auto& f : functions) table.add_column(f, "ns");
  for (std::size_t k = 0; k < bins; ++k) {
    std::vector<Cell> row(cells[k].begin(), cells[k].end());
    table.add_row(std::to_string(edges[k]), std::move(row));
  }
  return table;
}

}  // namespace tracekit
