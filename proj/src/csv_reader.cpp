#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tracekit/error.hpp"
#include "tracekit/readers.hpp"

namespace tracekit {

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string content;
  in.seekg(0, std::ios::end);
  auto size = in.tellg();
  if (size > 0) {
    content.resize(static_cast<std::size_t>(size));
    in.seekg(0);
    in.read(content.data(), size);
  }
  if (in.bad()) throw Error(Errc::IoError, "read failed for " + path.string());
  return content;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

constexpr std::size_t kMaxFields = 16;

/// Splits one CSV record into fields, honouring double-quoted fields. The
/// unescaped text of quoted fields lives in `scratch`, which never grows past
/// kMaxFields so the views stay valid. Returns false on malformed quoting or
/// too many fields.
bool split_record(std::string_view line, char delim, std::vector<std::string_view>& fields,
                  std::vector<std::string>& scratch) {
  fields.clear();
  scratch.clear();
  scratch.reserve(kMaxFields);
  std::size_t pos = 0;
  while (true) {
    if (fields.size() == kMaxFields) return false;
    if (pos < line.size() && line[pos] == '"') {
      auto& value = scratch.emplace_back();
      ++pos;
      bool closed = false;
      while (pos < line.size()) {
        if (line[pos] == '"') {
          if (pos + 1 < line.size() && line[pos + 1] == '"') {
            value.push_back('"');
            pos += 2;
            continue;
          }
          closed = true;
          ++pos;
          break;
        }
        value.push_back(line[pos++]);
      }
      if (!closed) return false;
      if (pos < line.size() && line[pos] != delim) return false;
      fields.emplace_back(value);
    } else {
      auto end = line.find(delim, pos);
      if (end == std::string_view::npos) end = line.size();
      fields.push_back(line.substr(pos, end - pos));
      pos = end;
    }
    if (pos >= line.size()) return true;
    ++pos;  // delimiter
    if (pos == line.size()) {
      fields.emplace_back(line.substr(pos, 0));
      return true;
    }
  }
}

bool needs_quotes(std::string_view field, char delim) {
  return field.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view field, char delim) {
  if (!needs_quotes(field, delim)) {
    out << field;
    return;
  }
  out << '"';
  for (char c : field) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

bool looks_numeric(std::string_view text) {
  std::int64_t i = 0;
  double d = 0;
  return parse_int(text, i) || parse_double(text, d);
}

void escape_into(std::string& out, std::string_view text) {
  for (char c : text) {
    if (c == '\\' || c == ';' || c == '=') out.push_back('\\');
    out.push_back(c);
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string text(buf, ptr);
  if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
  return text;
}

/// Splits on unescaped `sep`, keeping escapes intact.
std::vector<std::string_view> split_escaped(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\') {
      ++i;
      continue;
    }
    if (text[i] == sep) {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  parts.push_back(text.substr(start));
  return parts;
}

std::string unescape(std::string_view text, bool& had_escape) {
  std::string out;
  out.reserve(text.size());
  had_escape = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '\\' && i + 1 < text.size()) {
      had_escape = true;
      out.push_back(text[++i]);
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

enum class Layout { NoThread, NoAttrs, Full };

}  // namespace

std::string encode_attrs(const AttrMap& attrs) {
  std::string out;
  bool first = true;
  for (const auto& [key, value] : attrs) {
    if (!first) out.push_back(';');
    first = false;
    escape_into(out, key);
    out.push_back('=');
    if (const auto* i = std::get_if<std::int64_t>(&value)) {
      out += std::to_string(*i);
    } else if (const auto* d = std::get_if<double>(&value)) {
      out += format_double(*d);
    } else {
      const auto& s = std::get<std::string>(value);
      if (!s.empty() && looks_numeric(s)) {
        out.push_back('\\');
        out.push_back(s.front());
        escape_into(out, std::string_view(s).substr(1));
      } else {
        escape_into(out, s);
      }
    }
  }
  return out;
}

AttrMap decode_attrs(std::string_view text) {
  AttrMap attrs;
  if (text.empty()) return attrs;
  for (auto pair : split_escaped(text, ';')) {
    if (pair.empty()) continue;
    auto kv = split_escaped(pair, '=');
    if (kv.size() < 2) {
      throw Error(Errc::MalformedRow, "attribute without '=': " + std::string(pair));
    }
    // Anything after the first unescaped '=' belongs to the value.
    auto raw_value = pair.substr(kv[0].size() + 1);
    bool key_escaped = false;
    bool value_escaped = false;
    auto key = unescape(kv[0], key_escaped);
    auto value = unescape(raw_value, value_escaped);
    std::int64_t i = 0;
    double d = 0;
    if (!value_escaped && parse_int(value, i)) {
      attrs.set(std::move(key), i);
    } else if (!value_escaped && parse_double(value, d)) {
      attrs.set(std::move(key), d);
    } else {
      attrs.set(std::move(key), std::move(value));
    }
  }
  return attrs;
}

Trace parse_csv(std::string_view content, const CsvOptions& options) {
  const char delim = options.delimiter;
  auto next_line = [&content](std::size_t& pos) {
    auto end = content.find('\n', pos);
    if (end == std::string_view::npos) end = content.size();
    auto line = content.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  std::size_t pos = 0;
  if (content.empty()) throw Error(Errc::MalformedHeader, "empty file");
  auto header = next_line(pos);

  auto with_delim = [delim](std::string_view canonical) {
    std::string h(canonical);
    for (auto& c : h) {
      if (c == ',') c = delim;
    }
    return h;
  };
  const std::string full = with_delim(kCsvHeader);
  const std::string no_attrs = with_delim("timestamp,event_type,name,process,thread");
  const std::string no_thread = with_delim("timestamp,event_type,name,process");
  Layout layout;
  if (header == full) {
    layout = Layout::Full;
  } else if (header == no_attrs) {
    layout = Layout::NoAttrs;
  } else if (header == no_thread) {
    layout = Layout::NoThread;
  } else {
    throw Error(Errc::MalformedHeader, "unexpected header '" + std::string(header) + "'");
  }
  const std::size_t expected = layout == Layout::Full ? 6 : layout == Layout::NoAttrs ? 5 : 4;

  Trace trace;
  auto& table = trace.events;
  // Rough row-count guess keeps reallocation off the hot path.
  table.reserve(content.size() / 24 + 1);

  std::vector<std::string_view> fields;
  std::vector<std::string> scratch;
  std::size_t skipped = 0;
  std::size_t line_no = 1;
  while (pos < content.size()) {
    auto line = next_line(pos);
    ++line_no;
    auto fail = [&](const std::string& why) {
      if (options.strict) {
        throw Error(Errc::MalformedRow, "line " + std::to_string(line_no) + ": " + why);
      }
      ++skipped;
    };
    if (line.empty()) {
      if (pos >= content.size()) break;
      fail("empty line");
      continue;
    }
    if (!split_record(line, delim, fields, scratch)) {
      fail("malformed quoting");
      continue;
    }
    if (fields.size() != expected) {
      fail("expected " + std::to_string(expected) + " fields, got " +
           std::to_string(fields.size()));
      continue;
    }
    auto field = [&fields](std::size_t i) { return fields[i]; };

    std::int64_t ts = 0;
    ProcessId process = 0;
    ThreadId thread = 0;
    if (!parse_int(field(0), ts) || ts < 0) {
      fail("bad timestamp '" + std::string(field(0)) + "'");
      continue;
    }
    auto kind = parse_event_kind(field(1));
    if (!kind) {
      fail("bad event_type '" + std::string(field(1)) + "'");
      continue;
    }
    if (!parse_int(field(3), process)) {
      fail("bad process '" + std::string(field(3)) + "'");
      continue;
    }
    if (layout != Layout::NoThread && !parse_int(field(4), thread)) {
      fail("bad thread '" + std::string(field(4)) + "'");
      continue;
    }
    AttrMap attrs;
    if (layout == Layout::Full) {
      try {
        attrs = decode_attrs(field(5));
      } catch (const Error& e) {
        fail(e.what());
        continue;
      }
    }
    table.append(ts, *kind, table.strings().intern(field(2)), process, thread, std::move(attrs));
  }
  table.sort();
  trace.metadata["source_format"] = "csv";
  trace.metadata["skipped_rows"] = std::to_string(skipped);
  if (options.strict) trace.metadata["matching"] = "strict";
  return trace;
}

Trace read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  auto trace = parse_csv(slurp(path), options);
  trace.metadata["path"] = path.string();
  return trace;
}

void write_csv(const Trace& trace, std::ostream& out) {
  const auto& t = trace.events;
  out << kCsvHeader << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << t.timestamp(i) << ',' << to_string(t.kind(i)) << ',';
    write_field(out, t.name(i), ',');
    out << ',' << t.process(i) << ',' << t.thread(i) << ',';
    write_field(out, encode_attrs(t.attrs(i)), ',');
    out << '\n';
  }
}

void write_csv(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  write_csv(trace, out);
  if (!out) throw Error(Errc::IoError, "write failed for " + path.string());
}

std::string to_csv_string(const Trace& trace) {
  std::ostringstream out;
  write_csv(trace, out);
  return out.str();
}

TraceFormat detect_format(const std::filesystem::path& path) {
  return path.extension() == ".json" ? TraceFormat::Chrome : TraceFormat::Csv;
}

Trace read_trace(const std::filesystem::path& path, TraceFormat format, bool strict) {
  if (format == TraceFormat::Chrome) return read_chrome(path, ChromeOptions{strict});
  return read_csv(path, CsvOptions{',', strict});
}

}  // namespace tracekit
