#include "tracekit/diagnostics.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "tracekit/comm.hpp"
#include "tracekit/error.hpp"
#include "tracekit/profiles.hpp"

namespace tracekit {

AnalysisTable load_imbalance(Trace& trace, const ImbalanceOptions& options) {
  if (trace.events.empty()) throw Error(Errc::EmptyTrace, "load_imbalance on an empty trace");
  const auto profile = flat_profile(trace, {options.metric, GroupBy::Name, true});
  const auto ranks = trace.events.process_ids();
  const auto p = static_cast<double>(ranks.size());

  AnalysisTable table;
  table.row_key = "name";
  table.add_column("total", profile.units.back());
  table.add_column("imbalance", "ratio");
  table.add_column("top_processes");
  for (std::size_t r = 0; r < profile.rows(); ++r) {
    std::vector<std::pair<double, ProcessId>> loads;
    for (std::size_t c = 0; c < ranks.size(); ++c) loads.emplace_back(profile.number(r, c), ranks[c]);
    const double total = profile.number(r, ranks.size());
    const double max = std::max_element(loads.begin(), loads.end())->first;
    const double ratio = total == 0 ? 1.0 : max * p / total;
    std::stable_sort(loads.begin(), loads.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    std::string top;
    for (std::size_t k = 0; k < std::min(options.top_k, loads.size()); ++k) {
      if (k) top.push_back(',');
      top += std::to_string(loads[k].second);
    }
    table.add_row(profile.row_labels[r], {profile.at(r, ranks.size()), Cell{ratio}, Cell{top}});
  }
  return table;
}

IdleResult idle_time(Trace& trace, const IdleOptions& options) {
  if (trace.events.empty()) throw Error(Errc::EmptyTrace, "idle_time on an empty trace");
  ensure_matching(trace);
  const auto& t = trace.events;
  const auto& parent = *t.derived.parent_index;
  const auto& matching = *t.derived.matching_index;

  std::vector<bool> idle_name(t.strings().size(), false);
  for (const auto& name : options.idle_names) {
    if (auto id = t.strings().find(name)) idle_name[*id] = true;
  }
  std::map<ProcessId, std::int64_t> idle;
  for (auto rank : t.process_ids()) idle[rank] = 0;
  // covered[i]: row i lies inside an idle call. Parents precede children.
  std::vector<bool> covered(t.size(), false);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Enter) continue;
    const bool inside = parent[i] != kNoRow && covered[static_cast<std::size_t>(parent[i])];
    const bool is_idle = idle_name[t.name_id(i)];
    covered[i] = inside || is_idle;
    if (is_idle && !inside && matching[i] != kNoRow) {
      idle[t.process(i)] += t.timestamp(static_cast<std::size_t>(matching[i])) - t.timestamp(i);
    }
  }

  auto make = [](const std::vector<std::pair<ProcessId, std::int64_t>>& rows) {
    AnalysisTable table;
    table.row_key = "process";
    table.add_column("idle_ns", "ns");
    for (auto [rank, ns] : rows) table.add_row(std::to_string(rank), {Cell{ns}});
    return table;
  };
  std::vector<std::pair<ProcessId, std::int64_t>> rows(idle.begin(), idle.end());
  IdleResult result;
  result.all = make(rows);
  const auto k = std::min(options.k, rows.size());
  auto most = rows;
  std::stable_sort(most.begin(), most.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  result.most_idle = make({most.begin(), most.begin() + static_cast<std::ptrdiff_t>(k)});
  auto least = rows;
  std::stable_sort(least.begin(), least.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  result.least_idle = make({least.begin(), least.begin() + static_cast<std::ptrdiff_t>(k)});
  return result;
}

std::vector<std::size_t> step_units(const EventTable& events) {
  const auto& parent = events.derived.parent_index.value();
  std::vector<bool> has_child(events.size(), false);
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events.kind(i) != EventKind::Leave && parent[i] != kNoRow) {
      has_child[static_cast<std::size_t>(parent[i])] = true;
    }
  }
  std::vector<std::size_t> units;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events.kind(i) == EventKind::Instant || (events.kind(i) == EventKind::Enter && !has_child[i])) {
      units.push_back(i);
    }
  }
  return units;
}

Timestamp unit_end(const EventTable& events, std::size_t row) {
  if (events.kind(row) == EventKind::Enter) {
    const auto m = events.derived.matching_index.value()[row];
    if (m != kNoRow) return events.timestamp(static_cast<std::size_t>(m));
  }
  return events.timestamp(row);
}

Trace& assign_logical_steps(Trace& trace) {
  ensure_matching(trace);
  const auto& t = trace.events;
  const auto units = step_units(t);
  const auto n = units.size();
  std::vector<std::int64_t> node_of(t.size(), -1);
  for (std::size_t u = 0; u < n; ++u) node_of[units[u]] = static_cast<std::int64_t>(u);

  std::vector<std::vector<std::size_t>> succ(n);
  std::vector<std::size_t> indegree(n, 0);
  auto add_edge = [&](std::size_t a, std::size_t b) {
    succ[a].push_back(b);
    ++indegree[b];
  };
  // Units are in row order, so consecutive units of one stream are adjacent.
  for (std::size_t u = 1; u < n; ++u) {
    const auto a = units[u - 1];
    const auto b = units[u];
    if (t.process(a) == t.process(b) && t.thread(a) == t.thread(b)) add_edge(u - 1, u);
  }
  for (const auto& m : match_messages(trace).matched) {
    if (*m.recv_ts < m.send_ts) {
      throw Error(Errc::CycleDetected, "message from rank " + std::to_string(m.sender) + " row " +
                                           std::to_string(m.send_row) + " received before it was sent");
    }
    add_edge(static_cast<std::size_t>(node_of[m.send_row]), static_cast<std::size_t>(node_of[*m.recv_row]));
  }

  std::vector<std::int64_t> depth(n, 0);
  std::vector<std::size_t> ready;
  for (std::size_t u = 0; u < n; ++u) {
    if (indegree[u] == 0) ready.push_back(u);
  }
  std::size_t done = 0;
  while (!ready.empty()) {
    const auto u = ready.back();
    ready.pop_back();
    ++done;
    for (auto v : succ[u]) {
      depth[v] = std::max(depth[v], depth[u] + 1);
      if (--indegree[v] == 0) ready.push_back(v);
    }
  }
  if (done != n) {
    throw Error(Errc::CycleDetected, std::to_string(n - done) + " events lie on a happens-before cycle");
  }

  std::vector<std::int64_t> step(t.size(), -1);
  for (std::size_t u = 0; u < n; ++u) step[units[u]] = depth[u];
  const auto& parent = *t.derived.parent_index;
  for (std::size_t i = t.size(); i-- > 0;) {
    if (t.kind(i) == EventKind::Leave || parent[i] == kNoRow || step[i] < 0) continue;
    auto& p = step[static_cast<std::size_t>(parent[i])];
    p = std::max(p, step[i]);
  }
  const auto& matching = *t.derived.matching_index;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) == EventKind::Leave && matching[i] != kNoRow) step[i] = step[static_cast<std::size_t>(matching[i])];
  }
  trace.events.derived.logical_step = std::move(step);
  return trace;
}

LatenessResult calculate_lateness(Trace& trace) {
  if (trace.events.empty()) throw Error(Errc::EmptyTrace, "calculate_lateness on an empty trace");
  if (!trace.events.derived.logical_step) assign_logical_steps(trace);
  const auto& t = trace.events;
  const auto& step = *t.derived.logical_step;
  const auto units = step_units(t);

  std::map<std::int64_t, Timestamp> earliest;
  for (auto u : units) {
    const auto end = unit_end(t, u);
    auto [it, fresh] = earliest.try_emplace(step[u], end);
    if (!fresh) it->second = std::min(it->second, end);
  }

  LatenessResult result;
  auto& events = result.events;
  events.row_key = "row";
  events.add_column("process");
  events.add_column("thread");
  events.add_column("name");
  events.add_column("step");
  events.add_column("end_ns", "ns");
  events.add_column("lateness_ns", "ns");
  std::map<ProcessId, Timestamp> worst;
  for (auto rank : t.process_ids()) worst[rank] = 0;
  for (auto u : units) {
    const auto end = unit_end(t, u);
    const auto late = end - earliest[step[u]];
    worst[t.process(u)] = std::max(worst[t.process(u)], late);
    events.add_row(std::to_string(u),
                   {Cell{std::int64_t{t.process(u)}}, Cell{std::int64_t{t.thread(u)}}, Cell{t.name(u)},
                    Cell{step[u]}, Cell{end}, Cell{late}});
  }
  auto& per = result.per_process;
  per.row_key = "process";
  per.add_column("max_lateness_ns", "ns");
  for (auto [rank, late] : worst) per.add_row(std::to_string(rank), {Cell{late}});
  return result;
}

}  // namespace tracekit
