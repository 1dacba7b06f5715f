#include <algorithm>
#include <map>
#include <set>

#include "tracekit/comm.hpp"
#include "tracekit/diagnostics.hpp"
#include "tracekit/error.hpp"

namespace tracekit {

Timestamp CriticalPath::length() const {
  return segments.empty() ? 0 : segments.back().t_end - segments.front().t_start;
}

std::size_t CriticalPath::hops() const {
  return static_cast<std::size_t>(std::count_if(
      segments.begin(), segments.end(), [](const auto& s) { return s.kind == SegmentKind::MessageHop; }));
}

std::vector<ProcessId> CriticalPath::processes() const {
  std::vector<ProcessId> out;
  for (const auto& s : segments) {
    if (std::find(out.begin(), out.end(), s.process) == out.end()) out.push_back(s.process);
  }
  return out;
}

CriticalPath critical_path_analysis(Trace& trace, const CriticalPathOptions& options) {
  if (trace.events.empty()) throw Error(Errc::EmptyTrace, "critical_path_analysis on an empty trace");
  ensure_matching(trace);
  const auto& t = trace.events;

  const auto streams = t.streams();
  std::vector<std::size_t> stream_of(t.size());
  for (std::size_t s = 0; s < streams.size(); ++s) {
    for (auto i = streams[s].first; i < streams[s].second; ++i) stream_of[i] = s;
  }
  std::vector<std::vector<std::size_t>> units(streams.size());
  std::vector<std::size_t> position(t.size(), 0);
  for (auto u : step_units(t)) {
    auto& list = units[stream_of[u]];
    position[u] = list.size();
    list.push_back(u);
  }
  std::map<std::size_t, const MessageRecord*> send_of;
  const auto messages = match_messages(trace);
  for (const auto& m : messages.matched) send_of[*m.recv_row] = &m;
  std::set<std::size_t> unmatched(messages.unmatched_recvs.begin(), messages.unmatched_recvs.end());

  // The walk ends at the latest Leave (first row on ties); without Leaves,
  // at the latest event.
  auto latest = [&t](bool leaves_only) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (leaves_only && t.kind(i) != EventKind::Leave) continue;
      if (!best || t.timestamp(i) > t.timestamp(*best)) best = i;
    }
    return best;
  };
  const auto last = latest(true).value_or(*latest(false));

  CriticalPath path;
  std::vector<PathSegment> back;
  auto push = [&](std::size_t row, Timestamp lo, Timestamp hi, SegmentKind kind) {
    back.push_back({t.process(row), t.thread(row), row, lo, hi, kind});
  };

  auto s = stream_of[last];
  const Timestamp t_end = t.timestamp(last);
  const auto& tail_units = units[s];
  auto after = std::upper_bound(tail_units.begin(), tail_units.end(), t_end,
                                [&t](Timestamp v, std::size_t u) { return v < unit_end(t, u); });
  if (after == tail_units.begin()) {
    push(last, t.timestamp(streams[s].first), t_end, SegmentKind::Local);
  } else {
    auto i = static_cast<std::size_t>(after - tail_units.begin()) - 1;
    if (unit_end(t, tail_units[i]) < t_end) push(last, unit_end(t, tail_units[i]), t_end, SegmentKind::Local);
    while (true) {
      const auto u = units[s][i];
      const auto end = unit_end(t, u);
      const Timestamp prev_end = i > 0 ? unit_end(t, units[s][i - 1]) : t.timestamp(streams[s].first);
      path.units.push_back(u);
      if (auto it = send_of.find(u); it != send_of.end() && it->second->send_ts > prev_end) {
        const auto& m = *it->second;
        if (m.send_ts > end) {
          throw Error(Errc::CycleDetected, "receive at row " + std::to_string(u) + " precedes its send");
        }
        push(u, m.send_ts, end, SegmentKind::Local);
        push(m.send_row, m.send_ts, m.send_ts, SegmentKind::MessageHop);
        s = stream_of[m.send_row];
        i = position[m.send_row];
        continue;
      }
      push(u, prev_end, end, SegmentKind::Local);
      if (unmatched.contains(u)) {
        if (options.strict) {
          throw Error(Errc::UnmatchedDependency, "receive at row " + std::to_string(u) + " has no matched send");
        }
        path.unmatched_recv = u;
        break;
      }
      if (i == 0) break;
      --i;
    }
  }
  path.segments.assign(back.rbegin(), back.rend());
  std::reverse(path.units.begin(), path.units.end());
  return path;
}

AnalysisTable critical_path_table(const Trace& trace, const CriticalPath& path) {
  const auto& t = trace.events;
  AnalysisTable table;
  table.row_key = "segment";
  table.add_column("process");
  table.add_column("thread");
  table.add_column("event_row");
  table.add_column("name");
  table.add_column("kind");
  table.add_column("t_start", "ns");
  table.add_column("t_end", "ns");
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    const auto& seg = path.segments[k];
    table.add_row(std::to_string(k),
                  {Cell{std::int64_t{seg.process}}, Cell{std::int64_t{seg.thread}},
                   Cell{static_cast<std::int64_t>(seg.event_row)}, Cell{t.name(seg.event_row)},
                   Cell{std::string(seg.kind == SegmentKind::Local ? "local" : "message-hop")},
                   Cell{seg.t_start}, Cell{seg.t_end}});
  }
  return table;
}

}  // namespace tracekit
