#include <doctest.h>

#include "oracles.hpp"
#include "tracekit/diagnostics.hpp"
#include "tracekit/error.hpp"

using namespace tkt;

namespace {

double ratio_of(const AnalysisTable& t, std::string_view name) {
  return std::get<double>(t.at(*t.row_index(name), *t.column_index("imbalance")));
}

std::int64_t int_at(const AnalysisTable& t, std::string_view row, std::string_view col) {
  return std::get<std::int64_t>(t.at(*t.row_index(row), *t.column_index(col)));
}

/// P0 computes, then sends late; P1 waits in MPI_Recv and finishes last.
Trace late_sender() {
  TraceBuilder b;
  b.enter(0, "main", 0).call(0, 50, "compute", 0);
  b.enter(50, "MPI_Send", 0).send(55, 0, 1, 8).leave(60, "MPI_Send", 0).leave(60, "main", 0);
  b.enter(0, "main", 1).enter(5, "MPI_Recv", 1).recv(65, 1, 0, 8).leave(70, "MPI_Recv", 1);
  b.call(70, 100, "compute", 1).leave(100, "main", 1);
  return b.build();
}

/// Rank r waits for r - 1, works, and forwards to r + 1.
Trace relay(std::size_t ranks) {
  TraceBuilder b;
  Timestamp ts = 0;
  for (ProcessId r = 0; r < ranks; ++r) {
    b.enter(0, "main", r);
    if (r > 0) b.enter(1, "MPI_Recv", r).recv(ts + 2, r, r - 1, 4).leave(ts + 3, "MPI_Recv", r);
    b.call(ts + 3, ts + 40, "work", r);
    if (r + 1 < ranks) b.enter(ts + 40, "MPI_Send", r).send(ts + 41, r, r + 1, 4).leave(ts + 42, "MPI_Send", r);
    ts += 41;
  }
  for (ProcessId r = 0; r < ranks; ++r) b.leave(ts + 10 + r, "main", r);
  return b.build();
}

}  // namespace

TEST_CASE("imbalance is max over mean") {
  auto trace = TraceBuilder{}.call(0, 10, "foo", 0).call(0, 30, "foo", 1).build();
  CHECK(ratio_of(load_imbalance(trace), "foo") == 1.5);

  auto balanced = TraceBuilder{}.call(0, 10, "foo", 0).call(0, 10, "foo", 1).build();
  CHECK(ratio_of(load_imbalance(balanced), "foo") == 1.0);

  auto lone = TraceBuilder{}
                  .call(0, 40, "foo", 0)
                  .call(0, 40, "bar", 1)
                  .call(0, 40, "bar", 2)
                  .call(0, 40, "bar", 3)
                  .build();
  const auto t = load_imbalance(lone);
  CHECK(ratio_of(t, "foo") == 4.0);
  CHECK(int_at(t, "foo", "total") == 40);
  CHECK(std::get<std::string>(t.at(*t.row_index("bar"), *t.column_index("top_processes"))) == "1,2,3");
}

TEST_CASE("idle time counts maximal idle calls") {
  auto recv = TraceBuilder{}.call(10, 25, "MPI_Recv", 0).call(0, 5, "work", 1).build();
  const auto r = idle_time(recv);
  CHECK(int_at(r.all, "0", "idle_ns") == 15);
  CHECK(int_at(r.all, "1", "idle_ns") == 0);
  CHECK(r.most_idle.row_labels.front() == "0");
  CHECK(r.least_idle.row_labels.front() == "1");

  auto nested = TraceBuilder{}.call(0, 10, "MPI_Waitall").call(2, 5, "MPI_Wait").build();
  CHECK(int_at(idle_time(nested).all, "0", "idle_ns") == 10);

  auto none = TraceBuilder{}.call(0, 10, "work", 0).call(0, 10, "work", 1).build();
  const auto n = idle_time(none).all;
  for (std::size_t row = 0; row < n.rows(); ++row) CHECK(std::get<std::int64_t>(n.at(row, 0)) == 0);
}

TEST_CASE("sequential calls take consecutive steps") {
  auto trace = TraceBuilder{}.call(0, 1, "a").call(2, 3, "b").call(4, 5, "c").build();
  assign_logical_steps(trace);
  const auto& step = *trace.events.derived.logical_step;
  CHECK(step == std::vector<std::int64_t>{0, 0, 1, 1, 2, 2});
}

TEST_CASE("a receive lifts past its send") {
  auto trace = TraceBuilder{}.call(0, 1, "a", 0).call(2, 3, "b", 0).send(4, 0, 1, 1).recv(5, 1, 0, 1).build();
  assign_logical_steps(trace);
  const auto& t = trace.events;
  const auto& step = *t.derived.logical_step;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.name(i) == "MpiSend") CHECK(step[i] == 2);
    if (t.name(i) == "MpiRecv") CHECK(step[i] == 3);
  }
}

TEST_CASE("ping-pong steps alternate and match longest-path relaxation") {
  TraceBuilder b;
  for (int k = 0; k < 4; ++k) {
    const ProcessId from = k % 2;
    b.send(10 * k, from, 1 - from, 1).recv(10 * k + 5, 1 - from, from, 1);
  }
  auto trace = b.build();
  assign_logical_steps(trace);
  const auto& t = trace.events;
  const auto oracle = relaxation_steps(trace);
  std::vector<std::int64_t> order(8);
  for (auto [row, s] : oracle) {
    CHECK((*t.derived.logical_step)[row] == s);
    order[static_cast<std::size_t>(t.timestamp(row) / 5)] = s;
  }
  for (std::size_t k = 1; k < order.size(); ++k) CHECK(order[k] == order[k - 1] + 1);
}

TEST_CASE("steps equal relaxation on random message traces") {
  Rng rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    auto trace = random_message_trace(rng, MessageOptions{static_cast<std::size_t>(rng.uniform(2, 5)), 12, 0.0, 64});
    assign_logical_steps(trace);
    for (auto [row, s] : relaxation_steps(trace)) REQUIRE((*trace.events.derived.logical_step)[row] == s);
  }
}

TEST_CASE("a message received before it is sent is a cycle") {
  auto trace = TraceBuilder{}.send(10, 0, 1, 1).recv(5, 1, 0, 1).build();
  try {
    assign_logical_steps(trace);
    FAIL("expected CycleDetected");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CycleDetected);
  }
}

TEST_CASE("lateness against the earliest unit of each step") {
  auto same = TraceBuilder{}.call(0, 100, "work", 0).call(0, 100, "work", 1).build();
  const auto s = calculate_lateness(same);
  CHECK(int_at(s.per_process, "0", "max_lateness_ns") == 0);
  CHECK(int_at(s.per_process, "1", "max_lateness_ns") == 0);

  auto skew = TraceBuilder{}.call(0, 100, "work", 0).call(0, 140, "work", 1).build();
  const auto k = calculate_lateness(skew);
  CHECK(int_at(k.per_process, "0", "max_lateness_ns") == 0);
  CHECK(int_at(k.per_process, "1", "max_lateness_ns") == 40);
}

TEST_CASE("injected delays rank highest in lateness") {
  const Timestamp delay = 300;
  auto trace = delayed_ring_trace(8, 6, {0, 4}, delay);
  const auto result = calculate_lateness(trace);
  const auto& per = result.per_process;
  std::vector<std::pair<std::int64_t, std::string>> ranked;
  for (std::size_t r = 0; r < per.rows(); ++r) ranked.emplace_back(std::get<std::int64_t>(per.at(r, 0)), per.row_labels[r]);
  std::sort(ranked.rbegin(), ranked.rend());
  std::set<std::string> top{ranked[0].second, ranked[1].second};
  CHECK(top == std::set<std::string>{"0", "4"});
  CHECK(ranked[1].first > ranked[2].first);

  const auto& ev = result.events;
  const auto step_col = *ev.column_index("step");
  const auto late_col = *ev.column_index("lateness_ns");
  std::map<std::int64_t, bool> witness;
  for (std::size_t r = 0; r < ev.rows(); ++r) {
    const auto late = std::get<std::int64_t>(ev.at(r, late_col));
    CHECK(late >= 0);
    witness[std::get<std::int64_t>(ev.at(r, step_col))] |= late == 0;
  }
  for (auto [step, has] : witness) CHECK(has);
}

TEST_CASE("single process path is its own call chain") {
  auto trace = TraceBuilder{}.enter(0, "main").call(1, 10, "a").call(10, 30, "b").leave(31, "main").build();
  const auto path = critical_path_analysis(trace);
  CHECK(path.processes() == std::vector<ProcessId>{0});
  CHECK(path.hops() == 0);
  CHECK(path.units.size() == 2);
  CHECK(path.length() == 31);
  for (std::size_t k = 1; k < path.segments.size(); ++k) CHECK(path.segments[k].t_start == path.segments[k - 1].t_end);
}

TEST_CASE("late sender: path starts on the sender and hops at the send") {
  auto trace = late_sender();
  const auto path = critical_path_analysis(trace);
  const auto& t = trace.events;
  REQUIRE_FALSE(path.segments.empty());
  CHECK(path.segments.front().process == 0);
  CHECK(path.segments.back().process == 1);
  CHECK(path.hops() == 1);
  for (const auto& s : path.segments) {
    if (s.kind == SegmentKind::MessageHop) {
      CHECK(t.name(s.event_row) == "MpiSend");
      CHECK(s.t_start == 55);
    }
  }
  CHECK(path.units == enumerate_critical_path(trace).units);
  CHECK(path.length() == 100);

  const auto table = critical_path_table(trace, path);
  CHECK(table.rows() == path.segments.size());
}

TEST_CASE("relay visits every rank in order") {
  auto trace = relay(4);
  const auto path = critical_path_analysis(trace);
  CHECK(path.processes() == std::vector<ProcessId>{0, 1, 2, 3});
  CHECK(path.hops() == 3);
  CHECK(path.units == enumerate_critical_path(trace).units);
}

TEST_CASE("unmatched receive truncates, or throws when strict") {
  TraceBuilder b;
  b.call(0, 10, "work", 0).enter(0, "MPI_Recv", 1).recv(20, 1, 0, 1).leave(21, "MPI_Recv", 1).call(21, 30, "work", 1);
  auto trace = b.build();
  const auto path = critical_path_analysis(trace);
  CHECK(path.truncated());
  CHECK(path.processes() == std::vector<ProcessId>{1});
  try {
    critical_path_analysis(trace, CriticalPathOptions{true});
    FAIL("expected UnmatchedDependency");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnmatchedDependency);
  }
}

TEST_CASE("critical path equals exhaustive enumeration on small random traces") {
  Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    auto trace = random_message_trace(rng, MessageOptions{static_cast<std::size_t>(rng.uniform(2, 4)), 2, 0.0, 64});
    const auto path = critical_path_analysis(trace);
    const auto oracle = enumerate_critical_path(trace);
    REQUIRE(path.units == oracle.units);
    for (std::size_t k = 1; k < path.segments.size(); ++k) {
      CHECK(path.segments[k].t_start == path.segments[k - 1].t_end);
    }
  }
}
