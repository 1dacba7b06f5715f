// Acceptance harness: one pass/fail line per criterion. Run with a criterion
// id (C1..C11) to check only that one; with no arguments every criterion runs.

#include <fcntl.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "oracles.hpp"
#include "tracekit/callgraph.hpp"
#include "tracekit/cli.hpp"
#include "tracekit/diagnostics.hpp"
#include "tracekit/patterns.hpp"
#include "tracekit/profiles.hpp"
#include "tracekit/readers.hpp"

using namespace tkt;
namespace fs = std::filesystem;

namespace {

/// Collects the first few failures of a criterion; `ok()` is true when none
/// were recorded.
class Verdict {
 public:
  void expect(bool condition, const std::string& what) {
    if (condition) return;
    if (failures_++ < 3) detail_ += (detail_.empty() ? "" : "; ") + what;
  }
  void note(const std::string& text) { notes_ += (notes_.empty() ? "" : "; ") + text; }
  bool ok() const { return failures_ == 0; }
  std::string summary() const {
    std::string s = notes_;
    if (failures_ > 0) s += (s.empty() ? "" : "; ") + std::to_string(failures_) + " failure(s): " + detail_;
    return s;
  }

 private:
  std::size_t failures_ = 0;
  std::string detail_;
  std::string notes_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double v, int digits = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::int64_t int_cell(const AnalysisTable& t, std::size_t r, std::string_view col) {
  return std::get<std::int64_t>(t.at(r, *t.column_index(col)));
}

fs::path scratch(std::string_view name) {
  auto dir = fs::temp_directory_path() / "tracekit_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// C1: call matching, parents and depths agree with an independent per-stream
// pushdown replay.
void c1(Verdict& v) {
  Rng rng(1001);
  const auto start = Clock::now();
  std::size_t events = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    NestedOptions opt;
    opt.max_events = 500;
    opt.max_processes = 8;
    auto trace = random_nested_trace(rng, opt);
    events += trace.events.size();
    match_caller_callee(trace);
    const auto oracle = pushdown_replay(trace.events);
    const auto& d = trace.events.derived;
    v.expect(*d.matching_index == oracle.matching, "matching differs on trace " + std::to_string(trial));
    v.expect(*d.parent_index == oracle.parent, "parent differs on trace " + std::to_string(trial));
    v.expect(*d.depth == oracle.depth, "depth differs on trace " + std::to_string(trial));
  }
  const auto elapsed = seconds_since(start);
  v.expect(elapsed < 30, "took " + fixed(elapsed) + " s");
  v.note("1000 traces, " + std::to_string(events) + " events, " + fixed(elapsed) + " s");
}

// C2: per stream, exclusive times sum to the inclusive time of the top-level
// calls, and no exclusive time is negative.
void c2(Verdict& v) {
  Rng rng(1002);
  for (int trial = 0; trial < 500; ++trial) {
    auto trace = random_nested_trace(rng);
    calc_exc_metrics(trace);
    const auto& t = trace.events;
    const auto& inc = *t.derived.inc_ns;
    const auto& exc = *t.derived.exc_ns;
    const auto& depth = *t.derived.depth;
    std::map<std::pair<ProcessId, ThreadId>, std::pair<Timestamp, Timestamp>> sums;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.kind(i) != EventKind::Enter) continue;
      v.expect(exc[i] >= 0, "negative exclusive time at row " + std::to_string(i));
      auto& [exc_sum, top_sum] = sums[{t.process(i), t.thread(i)}];
      exc_sum += exc[i];
      if (depth[i] == 0) top_sum += inc[i];
    }
    for (const auto& [stream, s] : sums) {
      v.expect(s.first == s.second, "trace " + std::to_string(trial) + " stream " + std::to_string(stream.first) +
                                        ":" + std::to_string(stream.second) + " exc " + std::to_string(s.first) +
                                        " != top inc " + std::to_string(s.second));
    }
  }
  v.note("500 traces");
}

// C3: time-profile columns sum to the flat exclusive totals, and no bin holds
// more time than its width across all streams.
void c3(Verdict& v) {
  Rng rng(1003);
  for (int trial = 0; trial < 100; ++trial) {
    auto trace = random_nested_trace(rng, NestedOptions{300, 4, 2, 6, 0.1, 0.2});
    const auto flat = flat_profile(trace);
    const auto [lo, hi] = time_span(trace);
    const auto streams = static_cast<Timestamp>(trace.events.streams().size());
    for (std::size_t bins : {1u, 3u, 10u, 97u}) {
      const auto table = time_profile(trace, TimeProfileOptions{bins});
      const auto edges = bin_edges(lo, hi, bins);
      const auto label = "trace " + std::to_string(trial) + " B=" + std::to_string(bins);
      for (std::size_t r = 0; r < flat.rows(); ++r) {
        const auto col = table.column_index(flat.row_labels[r]);
        Timestamp sum = 0;
        if (col) {
          for (std::size_t b = 0; b < table.rows(); ++b) sum += std::get<std::int64_t>(table.at(b, *col));
        }
        v.expect(sum == int_cell(flat, r, "exc_ns"), label + " column " + flat.row_labels[r]);
      }
      for (std::size_t b = 0; b < table.rows(); ++b) {
        Timestamp sum = 0;
        for (std::size_t c = 0; c < table.cols(); ++c) sum += std::get<std::int64_t>(table.at(b, c));
        const auto width = std::max<Timestamp>(edges[b + 1] - edges[b], b + 1 == bins ? 1 : 0);
        v.expect(sum <= width * streams, label + " bin " + std::to_string(b) + " overfull");
      }
    }
  }
  v.note("100 traces x B in {1,3,10,97}");
}

// C4: matrix margins, histogram mass and the four-way breakdown are mutually
// consistent on random message traces.
void c4(Verdict& v) {
  Rng rng(1004);
  std::size_t messages = 0;
  for (int trial = 0; trial < 500; ++trial) {
    // Every send is received, so matched receive volume equals column sums.
    auto trace = random_message_trace(
        rng, MessageOptions{static_cast<std::size_t>(rng.uniform(2, 8)), static_cast<std::size_t>(rng.uniform(4, 20)),
                            0.0, 1 << 16});
    const auto match = match_messages(trace);
    const auto sends = match.all_sends().size();
    if (sends == 0) continue;
    messages += sends;
    const auto label = "trace " + std::to_string(trial);
    const auto m = comm_matrix_dense(trace);
    const auto by = comm_by_process(trace);
    for (std::size_t r = 0; r < by.rows(); ++r) {
      const auto p = static_cast<Eigen::Index>(std::stoll(by.row_labels[r]));
      if (p >= m.rows()) continue;
      v.expect(m.row(p).sum() == int_cell(by, r, "sent"), label + " row sum of " + by.row_labels[r]);
      v.expect(m.col(p).sum() == int_cell(by, r, "received"), label + " column sum of " + by.row_labels[r]);
    }
    const auto hist = message_histogram(trace, static_cast<std::size_t>(rng.uniform(1, 30)));
    std::int64_t mass = 0;
    for (std::size_t r = 0; r < hist.rows(); ++r) mass += int_cell(hist, r, "count");
    v.expect(mass == static_cast<std::int64_t>(sends), label + " histogram mass");

    const auto bd = comm_comp_breakdown(trace);
    const auto& t = trace.events;
    std::map<ProcessId, std::pair<Timestamp, Timestamp>> span;
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto [it, fresh] = span.try_emplace(t.process(i), t.timestamp(i), t.timestamp(i));
      if (!fresh) {
        it->second.first = std::min(it->second.first, t.timestamp(i));
        it->second.second = std::max(it->second.second, t.timestamp(i));
      }
    }
    Timestamp all_spans = 0;
    for (const auto& [p, s] : span) all_spans += s.second - s.first;
    for (std::size_t r = 0; r < bd.rows(); ++r) {
      const auto total = int_cell(bd, r, "comp_only") + int_cell(bd, r, "overlap") + int_cell(bd, r, "comm_only") +
                         int_cell(bd, r, "other");
      // The trailing "all" row aggregates every process.
      const auto expected = bd.row_labels[r] == "all"
                                ? all_spans
                                : span[static_cast<ProcessId>(std::stoll(bd.row_labels[r]))].second -
                                      span[static_cast<ProcessId>(std::stoll(bd.row_labels[r]))].first;
      v.expect(total == expected, label + " breakdown of " + bd.row_labels[r]);
    }
  }
  v.note("500 traces, " + std::to_string(messages) + " messages");
}

Series<double> to_series(const std::vector<double>& x) {
  return Eigen::Map<const Series<double>>(x.data(), static_cast<Eigen::Index>(x.size()));
}

// C5: the matrix profile matches brute force and ignores affine rescaling.
void c5(Verdict& v) {
  Rng rng(1005);
  const std::size_t windows[] = {4, 16, 64};
  double library_seconds = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = windows[trial % 3];
    const auto n = static_cast<std::size_t>(rng.uniform(static_cast<std::int64_t>(4 * m), 2000));
    std::vector<double> x(n);
    double walk = 0;
    for (auto& e : x) e = (walk += rng.normal());
    const double a = rng.real(0.01, 100);
    const double b = rng.real(-1e3, 1e3);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i] + b;

    const auto start = Clock::now();
    const auto mp = matrix_profile(to_series(x), m);
    const auto scaled = matrix_profile(to_series(y), m);
    library_seconds += seconds_since(start);

    const auto brute = brute_matrix_profile(x, m, mp.exclusion);
    const auto label = "series " + std::to_string(trial) + " (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")";
    double worst = 0;
    double worst_affine = 0;
    for (std::size_t i = 0; i < brute.profile.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      worst = std::max(worst, std::abs(mp.profile[k] - brute.profile[i]));
      worst_affine = std::max(worst_affine, std::abs(mp.profile[k] - scaled.profile[k]));
    }
    v.expect(worst <= 1e-9, label + " brute-force error " + std::to_string(worst));
    v.expect(worst_affine <= 1e-9, label + " affine error " + std::to_string(worst_affine));
  }
  v.expect(library_seconds < 60, "library took " + fixed(library_seconds) + " s");
  v.note("50 series, library " + fixed(library_seconds) + " s");
}

// C6: injected iterations are recovered at their exact boundaries.
void c6(Verdict& v) {
  auto it = iteration_trace(10, "timestep", 2);
  const auto r = pattern_detection(it.trace, "timestep");
  v.expect(r.spans.size() == 10, std::to_string(r.spans.size()) + " spans");
  for (std::size_t k = 0; k < std::min<std::size_t>(10, r.spans.size()); ++k) {
    v.expect(r.spans[k].start == it.boundaries[k] && r.spans[k].end == it.boundaries[k + 1],
             "span " + std::to_string(k) + " misplaced");
  }
  v.note("period " + std::to_string(r.period));
}

/// P0 computes then sends late; P1 waits in MPI_Recv and finishes last.
Trace late_sender() {
  TraceBuilder b;
  b.enter(0, "main", 0).call(0, 50, "compute", 0);
  b.enter(50, "MPI_Send", 0).send(55, 0, 1, 8).leave(60, "MPI_Send", 0).leave(60, "main", 0);
  b.enter(0, "main", 1).enter(5, "MPI_Recv", 1).recv(65, 1, 0, 8).leave(70, "MPI_Recv", 1);
  b.call(70, 100, "compute", 1).leave(100, "main", 1);
  return b.build();
}

// C7: the critical path is the heaviest path found by exhaustive enumeration,
// and the late-sender case starts on the sender.
void c7(Verdict& v) {
  Rng rng(1007);
  std::size_t paths = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto trace = random_message_trace(rng, MessageOptions{static_cast<std::size_t>(rng.uniform(2, 4)), 2, 0.0, 64});
    const auto path = critical_path_analysis(trace);
    const auto oracle = enumerate_critical_path(trace);
    paths += oracle.paths;
    v.expect(path.units == oracle.units, "trace " + std::to_string(trial) + " differs from enumeration");
  }
  auto trace = late_sender();
  const auto path = critical_path_analysis(trace);
  v.expect(!path.segments.empty() && path.segments.front().process == 0, "late sender path does not start on P0");
  v.expect(path.hops() == 1, "late sender hops " + std::to_string(path.hops()));
  v.expect(path.length() == 100, "late sender length " + std::to_string(path.length()));
  v.note("500 traces, " + std::to_string(paths) + " enumerated paths");
}

// C8: injected delays dominate lateness; lateness is non-negative and every
// step has a zero-lateness witness.
void c8(Verdict& v) {
  auto trace = delayed_ring_trace(8, 6, {0, 4}, 300);
  const auto result = calculate_lateness(trace);
  const auto& per = result.per_process;
  std::vector<std::pair<std::int64_t, std::string>> ranked;
  for (std::size_t r = 0; r < per.rows(); ++r) ranked.emplace_back(std::get<std::int64_t>(per.at(r, 0)), per.row_labels[r]);
  std::sort(ranked.rbegin(), ranked.rend());
  v.expect(ranked.size() >= 3, "fewer than three ranks");
  if (ranked.size() >= 3) {
    v.expect(std::set<std::string>{ranked[0].second, ranked[1].second} == std::set<std::string>{"0", "4"},
             "top ranks are " + ranked[0].second + "," + ranked[1].second);
    v.expect(ranked[1].first > ranked[2].first, "tie with the third rank");
  }
  const auto& ev = result.events;
  const auto step_col = *ev.column_index("step");
  const auto late_col = *ev.column_index("lateness_ns");
  std::map<std::int64_t, bool> witness;
  for (std::size_t r = 0; r < ev.rows(); ++r) {
    const auto late = std::get<std::int64_t>(ev.at(r, late_col));
    v.expect(late >= 0, "negative lateness at row " + std::to_string(r));
    witness[std::get<std::int64_t>(ev.at(r, step_col))] |= late == 0;
  }
  for (auto [step, has] : witness) v.expect(has, "step " + std::to_string(step) + " has no zero witness");
  v.note(std::to_string(witness.size()) + " steps");
}

// C9: imbalance is max over mean.
void c9(Verdict& v) {
  auto trace = TraceBuilder{}.call(0, 10, "foo", 0).call(0, 30, "foo", 1).build();
  const auto t = load_imbalance(trace);
  const auto ratio = std::get<double>(t.at(*t.row_index("foo"), *t.column_index("imbalance")));
  v.expect(ratio == 1.5, "imbalance " + std::to_string(ratio));
  v.note("imbalance " + fixed(ratio, 3));
}

double average_read_seconds(const fs::path& file, int trials) {
  double total = 0;
  for (int k = 0; k < trials; ++k) {
    const auto start = Clock::now();
    const auto trace = read_csv(file);
    total += seconds_since(start);
    if (trace.events.empty()) return -1;
  }
  return total / trials;
}

/// Peak resident set of a CLI run in bytes. The run is forked from a freshly
/// exec'd probe (this binary with --rss-probe) because a child forked from
/// the harness itself would inherit the harness's high-water mark.
long child_peak_rss(const std::vector<std::string>& args) {
  std::string command = fs::read_symlink("/proc/self/exe").string() + " --rss-probe " + TRACEKIT_CLI_PATH;
  for (const auto& a : args) command += " " + a;
  std::string out;
  if (FILE* pipe = popen(command.c_str(), "r")) {
    char buffer[256];
    while (auto n = std::fread(buffer, 1, sizeof buffer, pipe)) out.append(buffer, n);
    pclose(pipe);
  }
  return out.empty() ? -1 : std::stol(out);
}

/// Runs argv as a child with stdout discarded and prints its peak RSS in
/// bytes, or -1 when it fails.
int rss_probe(char** argv) {
  std::fflush(stdout);
  const pid_t pid = fork();
  if (pid == 0) {
    const int null = open("/dev/null", O_WRONLY);
    dup2(null, STDOUT_FILENO);
    execv(argv[0], argv);
    _exit(127);
  }
  int status = 0;
  rusage usage{};
  const bool ok = wait4(pid, &status, 0, &usage) >= 0 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
  std::printf("%ld\n", ok ? usage.ru_maxrss * 1024L : -1L);
  return ok ? 0 : 1;
}

// C10: reading scales linearly, parallel reads are faster and identical, and
// memory stays under 300 bytes per event.
void c10(Verdict& v) {
  const auto dir = scratch("c10");
  std::vector<std::pair<std::size_t, double>> timings;
  for (std::size_t n : {100000u, 200000u, 400000u}) {
    const auto file = dir / ("events_" + std::to_string(n) + ".csv");
    std::ofstream(file) << synthetic_csv(n, 10 + n, 0);
    timings.emplace_back(n, average_read_seconds(file, 3));
  }
  for (std::size_t k = 1; k < timings.size(); ++k) {
    const auto ratio = timings[k].second / timings[k - 1].second;
    v.expect(ratio <= 2.5, "read " + std::to_string(timings[k].first) + " events is " + fixed(ratio) +
                               "x the time of half as many");
    v.note(std::to_string(timings[k].first) + "/" + std::to_string(timings[k - 1].first) + " time ratio " + fixed(ratio));
  }

  const auto ranks = write_rank_files(dir / "ranks", 4, 100000, 1010);
  auto best_of = [&](unsigned workers, std::string& csv) {
    double best = 1e300;
    for (int k = 0; k < 3; ++k) {
      const auto start = Clock::now();
      const auto trace = read_parallel(ranks, TraceFormat::Csv, workers);
      best = std::min(best, seconds_since(start));
      if (k == 0) csv = to_csv_string(trace);
    }
    return best;
  };
  std::string serial_csv;
  std::string parallel_csv;
  const auto serial = best_of(1, serial_csv);
  const auto parallel = best_of(4, parallel_csv);
  const auto speedup = serial / parallel;
  v.expect(serial_csv == parallel_csv, "4-worker read differs from 1-worker read");
  v.expect(speedup >= 1.5, "4 workers only " + fixed(speedup) + "x faster than 1 (" +
                               std::to_string(std::thread::hardware_concurrency()) + " hardware threads)");
  v.note("4-worker speedup " + fixed(speedup));

  const auto small = dir / "small.csv";
  std::ofstream(small) << synthetic_csv(1000, 7, 0);
  const auto baseline = child_peak_rss({"info", small.string()});
  const auto big = child_peak_rss({"info", (dir / "events_400000.csv").string()});
  v.expect(baseline > 0 && big > 0, "CLI child failed");
  if (baseline > 0 && big > 0) {
    const double per_event = static_cast<double>(big - baseline) / 400000.0;
    v.expect(per_event < 300, "peak memory " + fixed(per_event, 1) + " B/event");
    v.note("peak memory " + fixed(per_event, 1) + " B/event");
  }
}

/// Random Chrome trace with nested complete events, begin/end pairs,
/// instants and flows, at sub-microsecond resolution.
std::string random_chrome(Rng& rng) {
  std::ostringstream os;
  os << "{\"traceEvents\":[";
  bool first = true;
  auto emit = [&](const std::string& body) {
    os << (first ? "" : ",") << '{' << body << '}';
    first = false;
  };
  auto micros = [](Timestamp ns) {
    std::ostringstream m;
    m << ns / 1000 << '.' << std::setw(3) << std::setfill('0') << ns % 1000;
    return m.str();
  };
  const auto processes = rng.uniform(1, 4);
  std::function<void(ProcessId, Timestamp, Timestamp, int)> fill = [&](ProcessId p, Timestamp lo, Timestamp hi,
                                                                       int depth) {
    auto cursor = lo;
    while (depth < 4 && hi - cursor > 20 && rng.chance(0.7)) {
      const auto a = rng.uniform(cursor, cursor + (hi - cursor) / 2);
      const auto b = rng.uniform(a + 1, hi);
      const auto name = "f" + std::to_string(rng.uniform(0, 5));
      const auto where = "\"pid\":" + std::to_string(p) + ",\"tid\":0";
      if (rng.chance(0.5)) {
        emit("\"ph\":\"X\",\"name\":\"" + name + "\"," + where + ",\"ts\":" + micros(a) + ",\"dur\":" + micros(b - a));
      } else {
        emit("\"ph\":\"B\",\"name\":\"" + name + "\"," + where + ",\"ts\":" + micros(a));
        emit("\"ph\":\"E\",\"name\":\"" + name + "\"," + where + ",\"ts\":" + micros(b));
      }
      if (rng.chance(0.2)) emit("\"ph\":\"i\",\"name\":\"mark\"," + where + ",\"ts\":" + micros(a) + ",\"s\":\"t\"");
      fill(p, a, b, depth + 1);
      cursor = b;
    }
  };
  for (ProcessId p = 0; p < processes; ++p) fill(p, 0, rng.uniform(1000, 100000), 0);
  for (int id = 0; processes > 1 && id < 5; ++id) {
    const auto from = rng.uniform(0, processes - 1);
    const auto to = (from + 1) % processes;
    const auto ts = rng.uniform(0, 900);
    emit("\"ph\":\"s\",\"id\":" + std::to_string(id) + ",\"name\":\"msg\",\"pid\":" + std::to_string(from) +
         ",\"tid\":0,\"ts\":" + micros(ts) + ",\"args\":{\"size\":" + std::to_string(rng.uniform(1, 4096)) + "}");
    emit("\"ph\":\"f\",\"id\":" + std::to_string(id) + ",\"name\":\"msg\",\"pid\":" + std::to_string(to) +
         ",\"tid\":0,\"ts\":" + micros(ts + rng.uniform(0, 100)));
  }
  os << "]}";
  return os.str();
}

std::string capture(const std::string& command) {
  std::string out;
  if (FILE* pipe = popen(command.c_str(), "r")) {
    char buffer[4096];
    while (auto n = std::fread(buffer, 1, sizeof buffer, pipe)) out.append(buffer, n);
    if (pclose(pipe) != 0) out += "\n<nonzero exit>";
  }
  return out;
}

// C11: Chrome input survives conversion to canonical CSV, and every CLI
// emission is byte-identical across runs.
void c11(Verdict& v) {
  const auto dir = scratch("c11");
  Rng rng(1011);
  for (int trial = 0; trial < 100; ++trial) {
    const auto chrome = dir / "trace.json";
    std::ofstream(chrome) << random_chrome(rng);
    const auto direct = read_chrome(chrome);
    const auto csv = dir / "trace.csv";
    write_csv(direct, csv);
    v.expect(same_events(read_csv(csv).events, direct.events), "chrome trace " + std::to_string(trial) + " changed");
  }

  const auto messages = (dir / "messages.csv").string();
  write_csv(random_message_trace(rng, MessageOptions{6, 30, 0.05, 8192}), messages);
  const auto iterations = (dir / "iterations.csv").string();
  write_csv(iteration_trace(10, "timestep", 3).trace, iterations);
  const auto chrome = (dir / "trace.json").string();
  const std::string bin = TRACEKIT_CLI_PATH;
  std::vector<std::string> commands;
  for (const auto& sub : subcommands()) {
    const auto name = std::string(sub.name);
    std::string input = name == "patterns" ? iterations + " --start-event timestep" : messages;
    if (name == "multirun") input = messages + " " + iterations;
    if (name == "convert") input = chrome;
    for (const auto* format : {"text", "csv", "json", "svg"}) {
      if (name == "convert" && std::string(format) != "csv") continue;
      commands.push_back(bin + " " + name + " " + input + " --format " + format + " 2>&1");
    }
  }
  std::size_t identical = 0;
  for (const auto& command : commands) {
    const auto a = capture(command);
    const auto b = capture("TRACE_WORKERS=3 " + command);
    v.expect(a == b, "output differs: " + command);
    identical += a == b;
  }
  v.note("100 chrome traces; " + std::to_string(identical) + "/" + std::to_string(commands.size()) +
         " CLI emissions identical");
}

struct Criterion {
  std::string id;
  std::string title;
  std::function<void(Verdict&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc > 2 && std::string_view(argv[1]) == "--rss-probe") return rss_probe(argv + 2);
  const std::vector<Criterion> criteria = {
      {"C1", "call matching agrees with pushdown replay", c1},
      {"C2", "exclusive time sums to top-level inclusive time", c2},
      {"C3", "time profile conserves flat exclusive totals", c3},
      {"C4", "communication summaries are consistent", c4},
      {"C5", "matrix profile matches brute force", c5},
      {"C6", "iteration spans are recovered", c6},
      {"C7", "critical path is the heaviest path", c7},
      {"C8", "lateness singles out the delayed ranks", c8},
      {"C9", "load imbalance is max over mean", c9},
      {"C10", "reading scales and stays within memory", c10},
      {"C11", "conversion round-trips and output is deterministic", c11},
  };
  const std::set<std::string> wanted(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    Verdict v;
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.expect(false, std::string("exception: ") + e.what());
    }
    std::cout << (v.ok() ? "[PASS] " : "[FAIL] ") << c.id << ' ' << c.title;
    if (const auto s = v.summary(); !s.empty()) std::cout << " (" << s << ')';
    std::cout << '\n';
    failed += v.ok() ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
