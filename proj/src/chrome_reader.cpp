#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "tracekit/error.hpp"
#include "tracekit/readers.hpp"

namespace tracekit {

namespace {

using json = nlohmann::json;

std::int64_t pow10(int k) {
  std::int64_t p = 1;
  while (k-- > 0) p *= 10;
  return p;
}

/// Exact decimal x1000 of an integer JSON number, or of the shortest
/// round-trip decimal form of a float (which reproduces the source text for
/// any realistic timestamp).
Timestamp to_nanos(const json& value) {
  if (value.is_number_integer()) {
    if (value.is_number_unsigned()) return static_cast<Timestamp>(value.get<std::uint64_t>()) * 1000;
    return value.get<std::int64_t>() * 1000;
  }
  if (value.is_number_float()) return micros_to_nanos(value.get<double>());
  if (value.is_string()) {
    double d = 0;
    const auto& s = value.get_ref<const std::string&>();
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return micros_to_nanos(d);
  }
  throw Error(Errc::MalformedJson, "timestamp is not a number: " + value.dump());
}

std::optional<std::uint32_t> to_id(const json& value) {
  if (value.is_number_unsigned()) return static_cast<std::uint32_t>(value.get<std::uint64_t>());
  if (value.is_number_integer()) {
    auto v = value.get<std::int64_t>();
    if (v >= 0) return static_cast<std::uint32_t>(v);
    return std::nullopt;
  }
  if (value.is_string()) {
    std::uint32_t v = 0;
    const auto& s = value.get_ref<const std::string&>();
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && ptr == s.data() + s.size()) return v;
  }
  return std::nullopt;
}

void flatten(const json& value, const std::string& prefix, AttrMap& out) {
  switch (value.type()) {
    case json::value_t::object:
      for (const auto& [k, v] : value.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
      break;
    case json::value_t::array:
      for (std::size_t i = 0; i < value.size(); ++i) {
        flatten(value[i], prefix + "." + std::to_string(i), out);
      }
      break;
    case json::value_t::boolean:
      out.set(prefix, std::int64_t{value.get<bool>() ? 1 : 0});
      break;
    case json::value_t::number_integer:
      out.set(prefix, value.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned: {
      auto u = value.get<std::uint64_t>();
      if (u <= static_cast<std::uint64_t>(INT64_MAX)) {
        out.set(prefix, static_cast<std::int64_t>(u));
      } else {
        out.set(prefix, static_cast<double>(u));
      }
      break;
    }
    case json::value_t::number_float:
      out.set(prefix, value.get<double>());
      break;
    case json::value_t::string:
      out.set(prefix, value.get<std::string>());
      break;
    default:
      break;  // null, binary, discarded
  }
}

std::string flow_key(const json& ev) {
  std::string key = ev.value("cat", std::string{});
  key.push_back('\x1f');
  if (auto it = ev.find("id"); it != ev.end()) key += it->is_string() ? it->get<std::string>() : it->dump();
  return key;
}

/// Equal-timestamp ordering classes. Complete (X) events carry no input order
/// relation to their nesting, so their Enter/Leave rows are ordered by
/// interval containment around the input-ordered B/E/instant rows.
enum TieClass : int { kXLeave = 0, kPlain = 1, kXEnter = 2, kXZero = 3 };

struct Pending {
  ProcessId pid;
  ThreadId tid;
  Timestamp ts;
  int tie;
  std::int64_t key1;
  std::int64_t key2;
  std::size_t seq;
  EventKind kind;
  std::string name;
  AttrMap attrs;
};

}  // namespace

Timestamp micros_to_nanos(double micros) {
  if (!(micros >= 0)) throw Error(Errc::MalformedJson, "negative or NaN timestamp");
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), micros);
  std::string_view text(buf, static_cast<std::size_t>(end - buf));
  // Split into digit string and decimal exponent: value = digits * 10^exp.
  std::string digits;
  int exp = 0;
  auto epos = text.find_first_of("eE");
  auto mantissa = text.substr(0, epos);
  if (epos != std::string_view::npos) {
    std::from_chars(text.data() + epos + 1 + (text[epos + 1] == '+' ? 1 : 0), text.data() + text.size(), exp);
  }
  auto dot = mantissa.find('.');
  if (dot == std::string_view::npos) {
    digits = std::string(mantissa);
  } else {
    digits = std::string(mantissa.substr(0, dot)) + std::string(mantissa.substr(dot + 1));
    exp -= static_cast<int>(mantissa.size() - dot - 1);
  }
  exp += 3;  // microseconds -> nanoseconds
  std::int64_t d = 0;
  std::from_chars(digits.data(), digits.data() + digits.size(), d);
  if (exp >= 0) return d * pow10(exp);
  if (-exp > 18) return 0;
  const auto div = pow10(-exp);
  auto q = d / div;
  auto r = d % div;
  if (2 * r >= div) ++q;
  return q;
}

Trace parse_chrome(std::string_view content, const ChromeOptions& options) {
  json doc;
  try {
    doc = json::parse(content.begin(), content.end());
  } catch (const json::parse_error& e) {
    throw Error(Errc::MalformedJson, e.what());
  }
  const json* events = nullptr;
  if (doc.is_array()) {
    events = &doc;
  } else if (doc.is_object() && doc.contains("traceEvents") && doc["traceEvents"].is_array()) {
    events = &doc["traceEvents"];
  } else {
    throw Error(Errc::MalformedJson, "expected an event array or an object with traceEvents");
  }

  Trace trace;
  std::vector<Pending> pending;
  pending.reserve(events->size());
  std::size_t skipped = 0;
  std::size_t seq = 0;
  // Flow halves per (cat, id), paired FIFO by timestamp once all are seen.
  std::map<std::string, std::pair<std::vector<const json*>, std::vector<const json*>>> flow_halves;

  for (const auto& ev : *events) {
    if (!ev.is_object() || !ev.contains("ph") || !ev["ph"].is_string()) {
      ++skipped;
      continue;
    }
    const auto& ph = ev["ph"].get_ref<const std::string&>();
    if (ph == "M") {
      const auto pid = ev.contains("pid") ? to_id(ev["pid"]) : std::nullopt;
      if (!pid) continue;
      const auto rank = std::to_string(*pid);
      const auto name = ev.value("name", std::string{});
      std::string label;
      if (auto args = ev.find("args"); args != ev.end() && args->is_object()) {
        label = args->value("name", std::string{});
      }
      if (name == "process_name") {
        trace.metadata["process_name." + rank] = label;
      } else if (name == "thread_name") {
        auto tid = ev.contains("tid") ? to_id(ev["tid"]) : std::optional<std::uint32_t>{0};
        trace.metadata["thread_name." + rank + "." + std::to_string(tid.value_or(0))] = label;
      }
      continue;
    }
    if (ph == "s" || ph == "f") {
      if (!ev.contains("ts") || !ev["ts"].is_number()) {
        ++skipped;
        continue;
      }
      auto& halves = flow_halves[flow_key(ev)];
      (ph == "s" ? halves.first : halves.second).push_back(&ev);
      continue;
    }
    const bool supported = ph == "B" || ph == "E" || ph == "X" || ph == "i" || ph == "I";
    if (!supported) {
      ++skipped;
      continue;
    }
    auto pid = ev.contains("pid") ? to_id(ev["pid"]) : std::optional<std::uint32_t>{0};
    auto tid = ev.contains("tid") ? to_id(ev["tid"]) : std::optional<std::uint32_t>{0};
    if (!pid || !tid || !ev.contains("ts")) {
      ++skipped;
      continue;
    }
    const Timestamp ts = to_nanos(ev["ts"]);
    AttrMap attrs;
    if (auto args = ev.find("args"); args != ev.end() && args->is_object()) flatten(*args, "", attrs);
    std::string name = ev.value("name", std::string{});

    if (ph == "X") {
      const Timestamp dur = ev.contains("dur") ? to_nanos(ev["dur"]) : 0;
      if (dur == 0) {
        pending.push_back({*pid, *tid, ts, kXZero, 0, 0, seq++, EventKind::Enter, name, attrs});
        pending.push_back({*pid, *tid, ts, kXZero, 0, 0, seq++, EventKind::Leave, name, {}});
      } else {
        const auto s = seq++;
        pending.push_back({*pid, *tid, ts, kXEnter, -dur, 0, s, EventKind::Enter, name, std::move(attrs)});
        pending.push_back({*pid, *tid, ts + dur, kXLeave, -ts, -static_cast<std::int64_t>(s), s,
                           EventKind::Leave, std::move(name), {}});
      }
    } else {
      const auto kind = ph == "B" ? EventKind::Enter : ph == "E" ? EventKind::Leave : EventKind::Instant;
      pending.push_back({*pid, *tid, ts, kPlain, 0, 0, seq++, kind, std::move(name), std::move(attrs)});
    }
  }

  std::size_t dropped_flows = 0;
  std::vector<std::pair<const json*, const json*>> flows;
  for (auto& [key, halves] : flow_halves) {
    auto by_ts = [](const json* a, const json* b) { return (*a)["ts"].get<double>() < (*b)["ts"].get<double>(); };
    std::stable_sort(halves.first.begin(), halves.first.end(), by_ts);
    std::stable_sort(halves.second.begin(), halves.second.end(), by_ts);
    const auto paired = std::min(halves.first.size(), halves.second.size());
    for (std::size_t i = 0; i < paired; ++i) flows.emplace_back(halves.first[i], halves.second[i]);
    dropped_flows += halves.first.size() + halves.second.size() - 2 * paired;
  }

  for (const auto& [start, finish] : flows) {
    auto spid = start->contains("pid") ? to_id((*start)["pid"]) : std::optional<std::uint32_t>{0};
    auto stid = start->contains("tid") ? to_id((*start)["tid"]) : std::optional<std::uint32_t>{0};
    auto fpid = finish->contains("pid") ? to_id((*finish)["pid"]) : std::optional<std::uint32_t>{0};
    auto ftid = finish->contains("tid") ? to_id((*finish)["tid"]) : std::optional<std::uint32_t>{0};
    if (!spid || !stid || !fpid || !ftid || !start->contains("ts") || !finish->contains("ts")) {
      ++dropped_flows;
      continue;
    }
    std::int64_t tag = 0;
    if (auto id = start->find("id"); id != start->end()) {
      if (id->is_number_integer()) {
        tag = id->get<std::int64_t>();
      } else if (auto parsed = to_id(*id)) {
        tag = *parsed;
      }
    }
    std::optional<AttrValue> size;
    for (const json* side : {start, finish}) {
      if (size) break;
      if (auto args = side->find("args"); args != side->end() && args->is_object()) {
        if (auto sz = args->find("size"); sz != args->end() && sz->is_number()) {
          size = sz->is_number_float() ? AttrValue{sz->get<double>()} : AttrValue{sz->get<std::int64_t>()};
        }
      }
    }
    AttrMap send{{"partner", std::int64_t{*fpid}}, {"tag", tag}};
    AttrMap recv{{"partner", std::int64_t{*spid}}, {"tag", tag}};
    if (size) {
      send.set("size", *size);
      recv.set("size", *size);
    }
    pending.push_back({*spid, *stid, to_nanos((*start)["ts"]), kPlain, 0, 0, seq++, EventKind::Instant,
                       "MpiSend", std::move(send)});
    pending.push_back({*fpid, *ftid, to_nanos((*finish)["ts"]), kPlain, 0, 0, seq++,
                       EventKind::Instant, "MpiRecv", std::move(recv)});
  }

  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return std::tie(a.pid, a.tid, a.ts, a.tie, a.key1, a.key2, a.seq) <
           std::tie(b.pid, b.tid, b.ts, b.tie, b.key1, b.key2, b.seq);
  });

  auto& table = trace.events;
  table.reserve(pending.size());
  for (auto& p : pending) {
    table.append(p.ts, p.kind, table.strings().intern(p.name), p.pid, p.tid, std::move(p.attrs));
  }
  table.sort();

  if (options.strict) {
    for (auto [begin, end] : table.streams()) {
      std::int64_t depth = 0;
      for (auto i = begin; i < end; ++i) {
        if (table.kind(i) == EventKind::Enter) ++depth;
        if (table.kind(i) == EventKind::Leave && --depth < 0) break;
      }
      if (depth != 0) {
        throw Error(Errc::UnbalancedBE, "pid " + std::to_string(table.process(begin)) + " tid " +
                                            std::to_string(table.thread(begin)));
      }
    }
    trace.metadata["matching"] = "strict";
  }
  trace.metadata["source_format"] = "chrome";
  trace.metadata["skipped_events"] = std::to_string(skipped);
  trace.metadata["dropped_flows"] = std::to_string(dropped_flows);
  return trace;
}

Trace read_chrome(const std::filesystem::path& path, const ChromeOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  auto trace = parse_chrome(buf.str(), options);
  trace.metadata["path"] = path.string();
  return trace;
}

}  // namespace tracekit
