#include "tracekit/cli.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "tracekit/comm.hpp"
#include "tracekit/diagnostics.hpp"
#include "tracekit/error.hpp"
#include "tracekit/patterns.hpp"
#include "tracekit/profiles.hpp"
#include "tracekit/query.hpp"
#include "tracekit/readers.hpp"
#include "tracekit/report.hpp"
#include "tracekit/svg.hpp"

namespace tracekit {

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> list = {
      {"info", "trace_summary", "Summarize a trace"},
      {"flat-profile", "flat_profile", "Per-function totals of a metric"},
      {"time-profile", "time_profile", "Per-function time in equal-width time bins"},
      {"comm-matrix", "comm_matrix", "Bytes or messages between every pair of processes"},
      {"comm-by-process", "comm_by_process", "Bytes or messages sent and received per process"},
      {"message-histogram", "message_histogram", "Distribution of message sizes"},
      {"comm-over-time", "comm_over_time", "Message count and volume per time bin"},
      {"comm-comp", "comm_comp_breakdown", "Computation/communication overlap per process"},
      {"imbalance", "load_imbalance", "Per-function load imbalance across processes"},
      {"idle", "idle_time", "Time spent in blocking waits per process"},
      {"lateness", "calculate_lateness", "Lateness relative to the earliest event of each logical step"},
      {"critical-path", "critical_path_analysis", "Chain of dependent events that determines the runtime"},
      {"patterns", "pattern_detection", "Repeating iteration spans of a start event"},
      {"filter", "filter", "Write the events matching a filter expression as CSV"},
      {"multirun", "multi_run_analysis", "Flat profiles of several runs side by side"},
      {"timeline", "render_timeline", "Timeline SVG"},
      {"convert", "write_csv", "Convert any supported input to canonical CSV"},
      {"cct", "create_cct", "Calling context tree as text or JSON"},
  };
  return list;
}

const std::vector<std::string_view>& library_analyses() {
  static const std::vector<std::string_view> list = {
      "trace_summary",        "flat_profile",     "time_profile",   "comm_matrix",
      "comm_by_process",      "message_histogram", "comm_over_time", "comm_comp_breakdown",
      "load_imbalance",       "idle_time",        "calculate_lateness", "critical_path_analysis",
      "pattern_detection",    "filter",           "multi_run_analysis", "render_timeline",
      "write_csv",            "create_cct",
  };
  return list;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::vector<std::string> inputs;
  std::string format;
  std::string output;
  std::string input_format = "auto";
  unsigned workers = 1;
  bool strict = false;
  std::string filter;
  std::string time_range;
  std::string processes;
  std::size_t bins = 0;
  std::string metric = "exc_ns";
  std::size_t top_k = 3;
  std::string colormap = "linear";
  std::string measure = "size";
  std::string group_by = "name";
  bool per_process = false;
  bool inclusive = false;
  std::vector<std::string> functions;
  bool by_receive = false;
  std::vector<std::string> comm_prefixes;
  std::vector<std::string> comm_names;
  std::vector<std::string> idle_names;
  std::string view = "all";
  bool per_event = false;
  bool strict_deps = false;
  std::string start_event;
  std::size_t window = 0;
  bool arrows = false;
  bool critical_path = false;
  std::string spans_event;
  std::size_t max_events = 50000;
  bool clip = false;
  bool no_pairs = false;
  std::vector<std::string> labels;
};

/// What a subcommand produced and how to write it in each format.
struct Emission {
  OutputFormat default_format = OutputFormat::Text;
  std::function<void(OutputFormat, std::ostream&)> write;
};

using SvgRenderer = std::function<std::string(const AnalysisTable&)>;

/// SVG bars of the numeric columns of a table.
std::string numeric_bars(const AnalysisTable& table) {
  AnalysisTable numeric;
  numeric.row_key = table.row_key;
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const bool all_numbers = std::all_of(table.cells.begin(), table.cells.end(),
                                         [c](const auto& row) { return !std::holds_alternative<std::string>(row[c]); });
    if (all_numbers) {
      keep.push_back(c);
      numeric.add_column(table.columns[c], table.units[c]);
    }
  }
  for (std::size_t r = 0; r < table.rows(); ++r) {
    std::vector<Cell> row;
    for (auto c : keep) row.push_back(table.cells[r][c]);
    numeric.add_row(table.row_labels[r], std::move(row));
  }
  return render_stacked_bars(numeric);
}

Emission table_emission(AnalysisTable table, SvgRenderer svg = numeric_bars) {
  auto shared = std::make_shared<AnalysisTable>(std::move(table));
  return {OutputFormat::Text, [shared, svg](OutputFormat f, std::ostream& out) {
            if (f == OutputFormat::Svg) {
              out << svg(*shared);
            } else {
              write_table(*shared, f, out);
            }
          }};
}

Emission document_emission(OutputFormat format, std::string body) {
  auto shared = std::make_shared<std::string>(std::move(body));
  return {format, [shared, format](OutputFormat f, std::ostream& out) {
            if (f != format) throw UsageError("this subcommand only writes " + std::string(format == OutputFormat::Svg ? "svg" : "csv"));
            out << *shared;
          }};
}

AttrValue parse_number(std::string_view text) {
  std::int64_t i = 0;
  double d = 0;
  const auto* end = text.data() + text.size();
  if (auto [p, ec] = std::from_chars(text.data(), end, i); ec == std::errc{} && p == end) return i;
  if (auto [p, ec] = std::from_chars(text.data(), end, d); ec == std::errc{} && p == end && std::isfinite(d)) return d;
  throw UsageError("bad number '" + std::string(text) + "'");
}

std::pair<AttrValue, AttrValue> parse_range(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw UsageError("--time-range expects LO:HI");
  return {parse_number(text.substr(0, colon)), parse_number(text.substr(colon + 1))};
}

Timestamp bound(const AttrValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  return static_cast<Timestamp>(std::ceil(std::get<double>(v)));
}

std::vector<AttrValue> parse_process_list(std::string_view text) {
  std::vector<AttrValue> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    auto item = text.substr(pos, comma - pos);
    const auto dash = item.find('-');
    auto as_int = [](std::string_view s) {
      auto v = parse_number(s);
      if (!std::holds_alternative<std::int64_t>(v)) throw UsageError("bad process '" + std::string(s) + "'");
      return std::get<std::int64_t>(v);
    };
    if (dash != std::string_view::npos && dash > 0) {
      const auto lo = as_int(item.substr(0, dash));
      const auto hi = as_int(item.substr(dash + 1));
      for (auto p = lo; p <= hi; ++p) out.emplace_back(p);
    } else {
      out.emplace_back(as_int(item));
    }
    pos = comma + 1;
  }
  return out;
}

/// Conjunction of --processes, --time-range and --filter, if any is set.
std::optional<FilterExpr> selection(const Options& o) {
  std::optional<FilterExpr> expr;
  auto add = [&expr](FilterExpr e) { expr = expr ? *expr && e : e; };
  if (!o.processes.empty()) add(in_set("process", parse_process_list(o.processes)));
  if (!o.time_range.empty()) {
    auto [lo, hi] = parse_range(o.time_range);
    add(between("timestamp", lo, hi));
  }
  if (!o.filter.empty()) add(parse_filter(o.filter));
  return expr;
}

TraceFormat input_format(const Options& o, const std::string& path) {
  if (o.input_format == "csv") return TraceFormat::Csv;
  if (o.input_format == "chrome") return TraceFormat::Chrome;
  return detect_format(path);
}

Trace apply_selection(Trace trace, const Options& o) {
  if (auto expr = selection(o)) return filter(trace, *expr);
  return trace;
}

Trace load(const Options& o) {
  std::vector<std::filesystem::path> paths(o.inputs.begin(), o.inputs.end());
  return apply_selection(read_parallel(paths, input_format(o, o.inputs.front()), o.workers, o.strict), o);
}

CommMeasure measure(const Options& o) { return o.measure == "count" ? CommMeasure::Count : CommMeasure::Size; }

CommPredicate comm_predicate(const Options& o) {
  CommPredicate p;
  if (!o.comm_prefixes.empty() || !o.comm_names.empty()) {
    p.prefixes = o.comm_prefixes;
    p.names = o.comm_names;
    p.substrings.clear();
  }
  return p;
}

std::optional<std::pair<Timestamp, Timestamp>> render_range(const Options& o) {
  if (o.time_range.empty()) return std::nullopt;
  auto [lo, hi] = parse_range(o.time_range);
  return std::pair{bound(lo), bound(hi)};
}

std::string timeline_svg(Trace& trace, const Options& o, std::ostream& err, const CriticalPath* path,
                         std::vector<Span> spans) {
  TimelineOptions t;
  t.range = render_range(o);
  t.arrows = o.arrows;
  t.path = path;
  t.spans = std::move(spans);
  t.max_events = o.max_events;
  t.log = &err;
  return render_timeline(trace, t);
}

AnalysisTable spans_table(const PatternResult& result) {
  AnalysisTable table;
  table.row_key = "span";
  table.add_column("start_ns", "ns");
  table.add_column("end_ns", "ns");
  for (std::size_t k = 0; k < result.spans.size(); ++k) {
    table.add_row(std::to_string(k), {Cell{result.spans[k].start}, Cell{result.spans[k].end}});
  }
  return table;
}

using Handler = std::function<Emission(const Options&, std::ostream&)>;

std::map<std::string_view, Handler> handlers() {
  std::map<std::string_view, Handler> h;
  h["info"] = [](const Options& o, std::ostream&) { return table_emission(trace_summary(load(o))); };
  h["flat-profile"] = [](const Options& o, std::ostream&) {
    auto trace = load(o);
    const auto group = o.group_by == "path" ? GroupBy::CallPath : GroupBy::Name;
    return table_emission(flat_profile(trace, {parse_metric(o.metric), group, o.per_process}));
  };
  h["time-profile"] = [](const Options& o, std::ostream&) {
    auto trace = load(o);
    return table_emission(time_profile(trace, {o.bins ? o.bins : kDefaultBins, o.inclusive, o.functions}),
                          [](const AnalysisTable& t) { return render_stacked_bars(t, "time profile"); });
  };
  h["comm-matrix"] = [](const Options& o, std::ostream&) {
    const auto colormap = o.colormap == "log" ? Colormap::Log : Colormap::Linear;
    return table_emission(comm_matrix(load(o), measure(o)),
                          [colormap](const AnalysisTable& t) { return render_heatmap(t, colormap); });
  };
  h["comm-by-process"] = [](const Options& o, std::ostream&) {
    return table_emission(comm_by_process(load(o), measure(o)));
  };
  h["message-histogram"] = [](const Options& o, std::ostream&) {
    return table_emission(message_histogram(load(o), o.bins ? o.bins : 20), [](const AnalysisTable& t) {
      AnalysisTable counts;
      counts.row_key = "bin_lo";
      counts.add_column("count", "messages");
      for (std::size_t r = 0; r < t.rows(); ++r) counts.add_row(format_cell(t.at(r, 0)), {t.at(r, 2)});
      return render_stacked_bars(counts, "message sizes");
    });
  };
  h["comm-over-time"] = [](const Options& o, std::ostream&) {
    const auto column = measure(o) == CommMeasure::Count ? 0 : 1;
    return table_emission(comm_over_time(load(o), o.bins ? o.bins : kDefaultBins, o.by_receive),
                          [column](const AnalysisTable& t) {
                            AnalysisTable one;
                            one.row_key = t.row_key;
                            one.add_column(t.columns[column], t.units[column]);
                            for (std::size_t r = 0; r < t.rows(); ++r) one.add_row(t.row_labels[r], {t.at(r, column)});
                            return render_stacked_bars(one, "communication over time");
                          });
  };
  h["comm-comp"] = [](const Options& o, std::ostream&) {
    auto trace = load(o);
    return table_emission(comm_comp_breakdown(trace, comm_predicate(o)));
  };
  h["imbalance"] = [](const Options& o, std::ostream&) {
    auto trace = load(o);
    return table_emission(load_imbalance(trace, {parse_metric(o.metric), o.top_k}));
  };
  h["idle"] = [](const Options& o, std::ostream&) {
    auto trace = load(o);
    IdleOptions opts;
    if (!o.idle_names.empty()) opts.idle_names = o.idle_names;
    opts.k = o.top_k;
    auto result = idle_time(trace, opts);
    if (o.view == "most") return table_emission(std::move(result.most_idle));
    if (o.view == "least") return table_emission(std::move(result.least_idle));
    return table_emission(std::move(result.all));
  };
  h["lateness"] = [](const Options& o, std::ostream&) {
    auto trace = load(o);
    auto result = calculate_lateness(trace);
    return table_emission(o.per_event ? std::move(result.events) : std::move(result.per_process));
  };
  h["critical-path"] = [](const Options& o, std::ostream& err) {
    auto trace = std::make_shared<Trace>(load(o));
    auto path = std::make_shared<CriticalPath>(critical_path_analysis(*trace, {o.strict_deps}));
    if (path->truncated()) err << "critical path truncated at unmatched receive row " << *path->unmatched_recv << '\n';
    auto svg = timeline_svg(*trace, o, err, path.get(), {});
    return table_emission(critical_path_table(*trace, *path), [svg](const AnalysisTable&) { return svg; });
  };
  h["patterns"] = [](const Options& o, std::ostream& err) {
    if (o.start_event.empty()) throw UsageError("--start-event is required");
    auto trace = load(o);
    PatternOptions opts;
    if (o.window) opts.window = o.window;
    opts.workers = o.workers;
    const auto result = pattern_detection(trace, o.start_event, opts);
    auto svg = timeline_svg(trace, o, err, nullptr, result.spans);
    return table_emission(spans_table(result), [svg](const AnalysisTable&) { return svg; });
  };
  h["filter"] = [](const Options& o, std::ostream&) {
    auto expr = selection(o);
    if (!expr) throw UsageError("give --filter, --processes or --time-range");
    std::vector<std::filesystem::path> paths(o.inputs.begin(), o.inputs.end());
    auto trace = read_parallel(paths, input_format(o, o.inputs.front()), o.workers, o.strict);
    return document_emission(OutputFormat::Csv, to_csv_string(filter(trace, *expr, {!o.no_pairs, o.clip})));
  };
  h["multirun"] = [](const Options& o, std::ostream&) {
    if (o.inputs.size() < 2) throw Error(Errc::TooFewRuns, "multirun needs at least 2 traces");
    std::vector<Trace> runs;
    for (const auto& path : o.inputs) runs.push_back(apply_selection(read_trace(path, input_format(o, path), o.strict), o));
    return table_emission(multi_run_analysis(runs, {parse_metric(o.metric), o.labels}));
  };
  h["timeline"] = [](const Options& o, std::ostream& err) {
    auto trace = load(o);
    std::unique_ptr<CriticalPath> path;
    if (o.critical_path) path = std::make_unique<CriticalPath>(critical_path_analysis(trace));
    std::vector<Span> spans;
    if (!o.spans_event.empty()) spans = pattern_detection(trace, o.spans_event).spans;
    return document_emission(OutputFormat::Svg, timeline_svg(trace, o, err, path.get(), std::move(spans)));
  };
  h["convert"] = [](const Options& o, std::ostream&) {
    return document_emission(OutputFormat::Csv, to_csv_string(load(o)));
  };
  h["cct"] = [](const Options& o, std::ostream&) {
    auto trace = std::make_shared<Trace>(load(o));
    create_cct(*trace);
    return Emission{OutputFormat::Text, [trace](OutputFormat f, std::ostream& out) {
                      if (f == OutputFormat::Json) {
                        write_cct_json(*trace, out);
                      } else if (f == OutputFormat::Text) {
                        write_cct_text(*trace, out);
                      } else {
                        throw UsageError("cct writes text or json");
                      }
                    }};
  };
  return h;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("traces", o.inputs, "Trace files (CSV or Chrome JSON); several per-process files are merged")
      ->required();
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json", "text", "svg"}));
  sub->add_option("--output,-o", o.output, "Write to this path instead of standard output");
  sub->add_option("--input-format", o.input_format, "Input format")->check(CLI::IsMember({"auto", "csv", "chrome"}));
  sub->add_option("--workers", o.workers, "Reader threads")->envname("TRACE_WORKERS")->check(CLI::PositiveNumber);
  sub->add_flag("--strict", o.strict, "Reject malformed rows and mismatched calls instead of repairing");
  sub->add_option("--filter", o.filter, "Filter expression applied before the analysis");
  sub->add_option("--time-range", o.time_range, "Keep events intersecting LO:HI (ns)");
  sub->add_option("--processes", o.processes, "Keep these ranks, e.g. 0,4,8-11");
}

void add_specific(std::string_view name, CLI::App* sub, Options& o) {
  auto metric = [&] { sub->add_option("--metric", o.metric, "exc_ns, inc_ns, exc:<attr> or inc:<attr>"); };
  auto bins = [&] { sub->add_option("--bins", o.bins, "Number of bins")->check(CLI::PositiveNumber); };
  auto measure_opt = [&] {
    sub->add_option("--measure", o.measure, "Bytes or message count")->check(CLI::IsMember({"size", "count"}));
  };
  if (name == "flat-profile") {
    metric();
    sub->add_option("--group-by", o.group_by, "Group by name or call path")->check(CLI::IsMember({"name", "path"}));
    sub->add_flag("--per-process", o.per_process, "One column per process");
  } else if (name == "time-profile") {
    bins();
    sub->add_flag("--inclusive", o.inclusive, "Bin inclusive instead of exclusive time");
    sub->add_option("--functions", o.functions, "Only these functions");
  } else if (name == "comm-matrix") {
    measure_opt();
    sub->add_option("--colormap", o.colormap, "Heatmap scaling")->check(CLI::IsMember({"linear", "log"}));
  } else if (name == "comm-by-process") {
    measure_opt();
  } else if (name == "message-histogram") {
    bins();
  } else if (name == "comm-over-time") {
    bins();
    measure_opt();
    sub->add_flag("--by-receive", o.by_receive, "Bin matched messages by receive time");
  } else if (name == "comm-comp") {
    sub->add_option("--comm-prefix", o.comm_prefixes, "Name prefixes that count as communication");
    sub->add_option("--comm-name", o.comm_names, "Exact names that count as communication");
  } else if (name == "imbalance") {
    metric();
    sub->add_option("--top-k", o.top_k, "Most loaded processes to list");
  } else if (name == "idle") {
    sub->add_option("--top-k", o.top_k, "Rows in the most/least views");
    sub->add_option("--idle-names", o.idle_names, "Calls that count as idle");
    sub->add_option("--view", o.view, "Which table to write")->check(CLI::IsMember({"all", "most", "least"}));
  } else if (name == "lateness") {
    sub->add_flag("--per-event", o.per_event, "Per-event lateness instead of the per-process maximum");
  } else if (name == "critical-path") {
    sub->add_flag("--strict-deps", o.strict_deps, "Fail on a receive without a matched send");
    sub->add_flag("--arrows", o.arrows, "Draw message arrows in SVG output");
  } else if (name == "patterns") {
    sub->add_option("--start-event", o.start_event, "Event that starts each iteration");
    sub->add_option("--window", o.window, "Matrix-profile window");
  } else if (name == "filter") {
    sub->add_flag("--clip", o.clip, "Clamp calls to the time window");
    sub->add_flag("--no-pairs", o.no_pairs, "Do not keep the partner of a matching Enter/Leave");
  } else if (name == "multirun") {
    metric();
    sub->add_option("--labels", o.labels, "Column labels, one per trace, comma separated")->delimiter(',');
  } else if (name == "timeline") {
    sub->add_flag("--arrows", o.arrows, "Draw message arrows");
    sub->add_flag("--critical-path", o.critical_path, "Overlay the critical path");
    sub->add_option("--spans", o.spans_event, "Overlay iteration spans of this start event");
    sub->add_option("--max-events", o.max_events, "Most calls to draw");
  }
}

std::optional<OutputFormat> format_from_path(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".csv") return OutputFormat::Csv;
  if (ext == ".json") return OutputFormat::Json;
  if (ext == ".svg") return OutputFormat::Svg;
  if (ext == ".txt") return OutputFormat::Text;
  return std::nullopt;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trace analysis toolkit", "tracekit"};
  app.require_subcommand(1);
  Options options;
  std::map<std::string_view, CLI::App*> subs;
  for (const auto& s : subcommands()) {
    auto* sub = app.add_subcommand(std::string(s.name), std::string(s.summary));
    add_common(sub, options);
    add_specific(s.name, sub, options);
    subs[s.name] = sub;
  }
  auto active = [&]() -> CLI::App* {
    for (auto [name, sub] : subs) {
      if (sub->parsed()) return sub;
    }
    return nullptr;
  };

  std::vector<std::string> argv_store{"tracekit"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    auto* sub = active();
    out << (sub ? sub->help() : app.help());
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    auto* sub = active();
    err << "error: " << e.what() << "\n\n" << (sub ? sub->help() : app.help());
    return 2;
  }

  auto* sub = active();
  const auto name = sub->get_name();
  try {
    const auto emission = handlers().at(name)(options, err);
    OutputFormat format = emission.default_format;
    if (!options.format.empty()) {
      format = *parse_output_format(options.format);
    } else if (!options.output.empty()) {
      format = format_from_path(options.output).value_or(format);
    }
    if (options.output.empty()) {
      emission.write(format, out);
    } else {
      std::ostringstream buffer;
      emission.write(format, buffer);
      std::ofstream file(options.output, std::ios::binary);
      if (!file) throw Error(Errc::IoError, "cannot write " + options.output);
      file << buffer.str();
      if (!file) throw Error(Errc::IoError, "write failed for " + options.output);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_run(args, std::cout, std::cerr);
}

}  // namespace tracekit
