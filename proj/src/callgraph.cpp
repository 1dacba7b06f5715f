#include "tracekit/callgraph.hpp"

#include <cmath>
#include <limits>

#include "tracekit/error.hpp"

namespace tracekit {

namespace {

/// Synthetic Leaves to emit immediately before `row`, or after the last row
/// of the stream ending at `row` when `at_stream_end`. Innermost first.
struct Repair {
  std::size_t row;
  bool at_stream_end;
  std::vector<NameId> names;
};

std::string row_detail(const EventTable& t, std::size_t row) {
  return "row " + std::to_string(row) + " (process " + std::to_string(t.process(row)) + ", thread " +
         std::to_string(t.thread(row)) + ", '" + t.name(row) + "' at " +
         std::to_string(t.timestamp(row)) + ")";
}

/// First pass: simulates every stream's stack and records the synthetic
/// Leaves needed to make it well nested.
std::vector<Repair> plan_repairs(const EventTable& t, bool strict, std::size_t& mismatched) {
  std::vector<Repair> repairs;
  std::vector<NameId> stack;
  for (auto [begin, end] : t.streams()) {
    stack.clear();
    for (auto i = begin; i < end; ++i) {
      switch (t.kind(i)) {
        case EventKind::Enter:
          stack.push_back(t.name_id(i));
          break;
        case EventKind::Leave: {
          if (!stack.empty() && stack.back() == t.name_id(i)) {
            stack.pop_back();
            break;
          }
          if (strict) throw Error(Errc::MismatchedLeave, row_detail(t, i));
          ++mismatched;
          std::size_t depth = stack.size();
          while (depth > 0 && stack[depth - 1] != t.name_id(i)) --depth;
          if (depth == 0) break;  // orphan: nothing open by that name
          Repair r{i, false, {}};
          while (stack.size() > depth) {
            r.names.push_back(stack.back());
            stack.pop_back();
          }
          stack.pop_back();
          repairs.push_back(std::move(r));
          break;
        }
        case EventKind::Instant:
          break;
      }
    }
    if (!stack.empty()) {
      Repair r{end, true, {}};
      while (!stack.empty()) {
        r.names.push_back(stack.back());
        stack.pop_back();
      }
      repairs.push_back(std::move(r));
    }
  }
  return repairs;
}

EventTable apply_repairs(const EventTable& t, const std::vector<Repair>& repairs, Timestamp t_max,
                         std::size_t& synthesized) {
  EventTable out;
  out.reserve(t.size());
  for (NameId id = 0; id < t.strings().size(); ++id) out.strings().intern(t.strings().resolve(id));
  const AttrMap synthetic{{"synthetic_leave", std::int64_t{1}}};
  std::size_t next = 0;
  auto emit = [&](const Repair& r, Timestamp ts, std::size_t ref) {
    for (auto name : r.names) {
      out.append(ts, EventKind::Leave, name, t.process(ref), t.thread(ref), synthetic);
      ++synthesized;
    }
  };
  for (auto [begin, end] : t.streams()) {
    for (auto i = begin; i < end; ++i) {
      if (next < repairs.size() && !repairs[next].at_stream_end && repairs[next].row == i) {
        emit(repairs[next++], t.timestamp(i), i);
      }
      out.append(t.timestamp(i), t.kind(i), t.name_id(i), t.process(i), t.thread(i), t.attrs(i));
    }
    if (next < repairs.size() && repairs[next].at_stream_end && repairs[next].row == end) {
      emit(repairs[next++], t_max, end - 1);
    }
  }
  return out;
}

}  // namespace

Trace& match_caller_callee(Trace& trace) {
  auto it = trace.metadata.find("matching");
  return match_caller_callee(trace, MatchOptions{it != trace.metadata.end() && it->second == "strict"});
}

Trace& match_caller_callee(Trace& trace, const MatchOptions& options) {
  auto& t = trace.events;
  t.sort();
  trace.cct.reset();
  std::size_t mismatched = 0;
  std::size_t synthesized = 0;
  if (!t.empty() && (options.strict || options.repair)) {
    auto repairs = plan_repairs(t, options.strict, mismatched);
    if (!repairs.empty()) {
      const auto t_max = time_span(trace).second;
      t = apply_repairs(t, repairs, t_max, synthesized);
    }
  }

  const auto n = t.size();
  std::vector<RowIndex> matching(n, kNoRow);
  std::vector<RowIndex> parent(n, kNoRow);
  std::vector<std::int32_t> depth(n, 0);
  std::size_t orphans = 0;
  std::vector<std::size_t> stack;
  for (auto [begin, end] : t.streams()) {
    stack.clear();
    for (auto i = begin; i < end; ++i) {
      const auto top = stack.empty() ? kNoRow : static_cast<RowIndex>(stack.back());
      switch (t.kind(i)) {
        case EventKind::Enter:
          parent[i] = top;
          depth[i] = static_cast<std::int32_t>(stack.size());
          stack.push_back(i);
          break;
        case EventKind::Leave:
          if (!stack.empty() && t.name_id(stack.back()) == t.name_id(i)) {
            const auto e = stack.back();
            stack.pop_back();
            matching[i] = static_cast<RowIndex>(e);
            matching[e] = static_cast<RowIndex>(i);
            parent[i] = parent[e];
            depth[i] = depth[e];
          } else {
            ++orphans;
            parent[i] = top;
            depth[i] = static_cast<std::int32_t>(stack.size());
          }
          break;
        case EventKind::Instant:
          parent[i] = top;
          depth[i] = static_cast<std::int32_t>(stack.size());
          break;
      }
    }
  }
  t.derived.clear();
  t.derived.matching_index = std::move(matching);
  t.derived.parent_index = std::move(parent);
  t.derived.depth = std::move(depth);
  trace.metadata["mismatched_leaves"] = std::to_string(mismatched);
  trace.metadata["orphan_leaves"] = std::to_string(orphans);
  trace.metadata["synthetic_leaves"] = std::to_string(synthesized);
  return trace;
}

void ensure_matching(Trace& trace) {
  if (!trace.events.derived.matching_index) match_caller_callee(trace);
}

Trace& create_cct(Trace& trace) {
  ensure_matching(trace);
  auto& t = trace.events;
  const auto& parent = *t.derived.parent_index;
  const auto& matching = *t.derived.matching_index;
  Cct cct;
  std::vector<CctNodeId> node(t.size(), kNoNode);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) == EventKind::Enter) {
      const auto p = parent[i];
      node[i] = cct.child(p == kNoRow ? kNoNode : node[static_cast<std::size_t>(p)], t.name_id(i));
    } else if (t.kind(i) == EventKind::Leave && matching[i] != kNoRow) {
      node[i] = node[static_cast<std::size_t>(matching[i])];
    }
  }
  t.derived.cct_node_id = std::move(node);
  trace.cct = std::move(cct);
  return trace;
}

std::vector<std::vector<std::size_t>> child_calls(const EventTable& events) {
  const auto& parent = events.derived.parent_index.value();
  std::vector<std::vector<std::size_t>> children(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events.kind(i) == EventKind::Enter && parent[i] != kNoRow) {
      children[static_cast<std::size_t>(parent[i])].push_back(i);
    }
  }
  return children;
}

namespace {

bool is_time_metric(std::string_view metric) {
  return metric == "time" || metric == "timestamp" || metric.empty();
}

}  // namespace

Trace& calc_inc_metrics(Trace& trace, std::string_view metric) {
  ensure_matching(trace);
  auto& t = trace.events;
  const auto& matching = *t.derived.matching_index;
  if (is_time_metric(metric)) {
    std::vector<Timestamp> inc(t.size(), 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.kind(i) == EventKind::Enter && matching[i] != kNoRow) {
        inc[i] = t.timestamp(static_cast<std::size_t>(matching[i])) - t.timestamp(i);
      }
    }
    t.derived.inc_ns = std::move(inc);
    return trace;
  }
  const std::string key(metric);
  std::vector<double> inc(t.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Enter || matching[i] == kNoRow) continue;
    const auto leave = static_cast<std::size_t>(matching[i]);
    const auto* a = t.attrs(i).find(key);
    const auto* b = t.attrs(leave).find(key);
    auto va = a ? as_number(*a) : std::nullopt;
    auto vb = b ? as_number(*b) : std::nullopt;
    if (!va || !vb) {
      throw Error(Errc::MissingMetric, "'" + key + "' missing on " + row_detail(t, va ? leave : i));
    }
    inc[i] = *vb - *va;
  }
  t.derived.inc_attr[key] = std::move(inc);
  return trace;
}

Trace& calc_exc_metrics(Trace& trace, std::string_view metric) {
  auto& t = trace.events;
  const bool time = is_time_metric(metric);
  const std::string key(metric);
  if (time ? !t.derived.inc_ns : !t.derived.inc_attr.contains(key)) calc_inc_metrics(trace, metric);
  const auto& parent = *t.derived.parent_index;
  auto subtract_children = [&](auto inc) {
    auto exc = inc;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.kind(i) == EventKind::Enter && parent[i] != kNoRow) {
        exc[static_cast<std::size_t>(parent[i])] -= inc[i];
      }
    }
    return exc;
  };
  if (time) {
    t.derived.exc_ns = subtract_children(*t.derived.inc_ns);
  } else {
    t.derived.exc_attr[key] = subtract_children(t.derived.inc_attr.at(key));
  }
  return trace;
}

void ensure_time_metrics(Trace& trace) {
  ensure_matching(trace);
  if (!trace.events.derived.inc_ns) calc_inc_metrics(trace);
  if (!trace.events.derived.exc_ns) calc_exc_metrics(trace);
}

std::string Metric::label() const {
  if (is_time()) return inclusive ? "inc_ns" : "exc_ns";
  return (inclusive ? "inc:" : "exc:") + attr;
}

Metric parse_metric(std::string_view text) {
  if (text == "exc_ns" || text == "exc" || text == "time") return Metric{"", false};
  if (text == "inc_ns" || text == "inc") return Metric{"", true};
  if (text.starts_with("exc:") && text.size() > 4) return Metric{std::string(text.substr(4)), false};
  if (text.starts_with("inc:") && text.size() > 4) return Metric{std::string(text.substr(4)), true};
  throw Error(Errc::InvalidArgument, "unknown metric '" + std::string(text) +
                                         "' (expected exc_ns, inc_ns, exc:<attr> or inc:<attr>)");
}

void ensure_metric(Trace& trace, const Metric& metric) {
  if (metric.is_time()) {
    ensure_time_metrics(trace);
    return;
  }
  ensure_matching(trace);
  auto& d = trace.events.derived;
  if (!d.inc_attr.contains(metric.attr)) calc_inc_metrics(trace, metric.attr);
  if (!metric.inclusive && !d.exc_attr.contains(metric.attr)) calc_exc_metrics(trace, metric.attr);
}

}  // namespace tracekit
