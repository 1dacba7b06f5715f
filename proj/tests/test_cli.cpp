#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "generators.hpp"
#include "tracekit/cli.hpp"
#include "tracekit/readers.hpp"

using namespace tkt;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_run(args, out, err);
  return {code, out.str(), err.str()};
}

/// Fixture files shared by the CLI tests.
struct Files {
  fs::path dir;
  std::string messages;
  std::string iterations;
  std::string chrome;

  Files() : dir(fs::temp_directory_path() / "tracekit_cli_tests") {
    fs::remove_all(dir);
    fs::create_directories(dir);
    Rng rng(101);
    messages = (dir / "messages.csv").string();
    write_csv(random_message_trace(rng, MessageOptions{4, 12, 0.0, 2048}), messages);
    iterations = (dir / "iterations.csv").string();
    write_csv(iteration_trace(10, "timestep", 2).trace, iterations);
    chrome = (dir / "trace.json").string();
    std::ofstream(chrome) << R"({"traceEvents":[
      {"ph":"X","name":"main","pid":0,"tid":0,"ts":0,"dur":100},
      {"ph":"X","name":"MPI_Send","pid":0,"tid":0,"ts":10,"dur":5},
      {"ph":"s","id":1,"name":"m","pid":0,"tid":0,"ts":12,"args":{"size":256}},
      {"ph":"X","name":"main","pid":1,"tid":0,"ts":0,"dur":100},
      {"ph":"X","name":"MPI_Recv","pid":1,"tid":0,"ts":5,"dur":20},
      {"ph":"f","id":1,"name":"m","pid":1,"tid":0,"ts":20}]})";
  }
};

const Files& files() {
  static const Files f;
  return f;
}

}  // namespace

TEST_CASE("every library analysis backs exactly one subcommand") {
  std::multiset<std::string_view> backed;
  std::set<std::string_view> names;
  for (const auto& s : subcommands()) {
    backed.insert(s.analysis);
    CHECK(names.insert(s.name).second);
  }
  for (auto a : library_analyses()) CHECK(backed.count(a) == 1);
  CHECK(backed.size() == library_analyses().size());
  for (auto required : {"info", "flat-profile", "time-profile", "comm-matrix", "comm-by-process", "message-histogram",
                        "comm-over-time", "comm-comp", "imbalance", "idle", "lateness", "critical-path", "patterns",
                        "filter", "multirun", "timeline", "convert"}) {
    CHECK(names.contains(required));
  }
}

TEST_CASE("flat-profile json is sorted descending") {
  const auto r = run({"flat-profile", files().messages, "--format", "json"});
  REQUIRE(r.code == 0);
  CHECK(r.out.front() == '[');
  std::vector<long long> values;
  for (auto pos = r.out.find("\"exc_ns\": "); pos != std::string::npos; pos = r.out.find("\"exc_ns\": ", pos + 1)) {
    values.push_back(std::stoll(r.out.substr(pos + 10)));
  }
  REQUIRE(values.size() >= 3);
  CHECK(std::is_sorted(values.rbegin(), values.rend()));
  CHECK(r.out.find("\"name\": \"main\"") != std::string::npos);
}

TEST_CASE("comm-matrix renders a log heatmap to a file") {
  const auto path = (files().dir / "m.svg").string();
  const auto r = run({"comm-matrix", files().messages, "--output", path, "--colormap", "log"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::stringstream svg;
  svg << std::ifstream(path).rdbuf();
  CHECK(svg.str().starts_with("<svg"));
  CHECK(svg.str().find("(log,") != std::string::npos);
  CHECK(svg.str().find("class=\"cell\"") != std::string::npos);
}

TEST_CASE("usage errors exit 2 with help") {
  const auto bad = run({"nonsense-subcommand"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("flat-profile") != std::string::npos);

  const auto option = run({"flat-profile", files().messages, "--bins", "0"});
  CHECK(option.code == 2);
  const auto format = run({"flat-profile", files().messages, "--format", "xml"});
  CHECK(format.code == 2);
  CHECK(format.err.find("--format") != std::string::npos);
  CHECK(run({}).code == 2);
}

TEST_CASE("analysis and io errors exit 1") {
  CHECK(run({"flat-profile", (files().dir / "missing.csv").string()}).code == 1);
  const auto nocomm = run({"comm-matrix", files().iterations});
  CHECK(nocomm.code == 1);
  CHECK(nocomm.err.find("NoCommData") != std::string::npos);
  CHECK(run({"filter", files().messages, "--filter", "name ==="}).code != 0);
  CHECK(run({"multirun", files().messages}).code == 1);
}

TEST_CASE("filters and process selection apply before the analysis") {
  const auto all = run({"info", files().messages, "--format", "csv"});
  const auto some = run({"info", files().messages, "--format", "csv", "--processes", "0,2-3"});
  REQUIRE(all.code == 0);
  REQUIRE(some.code == 0);
  CHECK(some.out.find("processes,3") != std::string::npos);
  const auto named = run({"filter", files().messages, "--filter", "name == \"compute\""});
  REQUIRE(named.code == 0);
  auto trace = parse_csv(named.out);
  CHECK(trace.events.size() > 0);
  for (std::size_t i = 0; i < trace.events.size(); ++i) CHECK(trace.events.name(i) == "compute");
  const auto windowed = run({"timeline", files().messages, "--time-range", "1000:5000"});
  REQUIRE(windowed.code == 0);
  CHECK(windowed.out.find("<desc class=\"range\">1000 5000</desc>") != std::string::npos);
}

TEST_CASE("chrome input converts to canonical csv") {
  const auto r = run({"convert", files().chrome});
  REQUIRE(r.code == 0);
  CHECK(r.out.starts_with(std::string(kCsvHeader)));
  CHECK(same_events(parse_csv(r.out).events, read_chrome(files().chrome).events));
  const auto m = run({"comm-matrix", files().chrome, "--format", "csv"});
  CHECK(m.out == "sender,0,1\n0,0,256\n1,0,0\n");
}

TEST_CASE("every subcommand is byte-identical across runs") {
  const auto& f = files();
  const std::vector<std::vector<std::string>> invocations = {
      {"info", f.messages},
      {"flat-profile", f.messages, "--per-process", "--format", "csv"},
      {"time-profile", f.messages, "--bins", "7", "--format", "svg"},
      {"comm-matrix", f.messages, "--format", "json"},
      {"comm-by-process", f.messages, "--format", "svg"},
      {"message-histogram", f.messages, "--bins", "5"},
      {"comm-over-time", f.messages, "--bins", "4", "--format", "json"},
      {"comm-comp", f.messages, "--format", "csv"},
      {"imbalance", f.messages, "--top-k", "2"},
      {"idle", f.messages, "--view", "most"},
      {"lateness", f.messages, "--per-event", "--format", "csv"},
      {"critical-path", f.messages, "--format", "json"},
      {"critical-path", f.messages, "--format", "svg"},
      {"patterns", f.iterations, "--start-event", "timestep", "--format", "csv"},
      {"filter", f.messages, "--filter", "process in [1,2] && time between [0, 6000)", "--clip"},
      {"multirun", f.messages, f.iterations, "--labels", "a,b"},
      {"timeline", f.messages, "--arrows", "--critical-path"},
      {"convert", f.chrome},
      {"cct", f.messages, "--format", "json"},
  };
  for (const auto& args : invocations) {
    const auto a = run(args);
    const auto b = run(args);
    INFO(args[0]);
    CHECK(a.code == 0);
    CHECK(!a.out.empty());
    CHECK(a.out == b.out);
  }
}

#ifdef TRACEKIT_CLI_PATH
TEST_CASE("the installed binary reports exit codes") {
  const std::string bin = TRACEKIT_CLI_PATH;
  const auto quiet = " >/dev/null 2>&1";
  CHECK(WEXITSTATUS(std::system((bin + " info " + files().messages + quiet).c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((bin + " nonsense-subcommand" + quiet).c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((bin + " info /nonexistent.csv" + quiet).c_str())) == 1);
  CHECK(WEXITSTATUS(std::system(("TRACE_WORKERS=3 " + bin + " info " + files().messages + quiet).c_str())) == 0);
}
#endif
