#include "tracekit/report.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "tracekit/error.hpp"

namespace tracekit {

namespace {

using Json = nlohmann::ordered_json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void csv_field(std::ostream& out, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
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

Json json_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return *i;
  if (const auto* d = std::get_if<double>(&cell)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  return std::get<std::string>(cell);
}

Json json_label(const std::string& label) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(label.data(), label.data() + label.size(), v);
  if (ec == std::errc{} && ptr == label.data() + label.size() && std::to_string(v) == label) return v;
  return label;
}

}  // namespace

std::optional<OutputFormat> parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  if (text == "text") return OutputFormat::Text;
  if (text == "svg") return OutputFormat::Svg;
  return std::nullopt;
}

std::string format_cell(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
  return std::get<std::string>(cell);
}

void write_table_csv(const AnalysisTable& table, std::ostream& out) {
  csv_field(out, table.row_key);
  for (const auto& c : table.columns) {
    out << ',';
    csv_field(out, c);
  }
  out << '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    csv_field(out, table.row_labels[r]);
    for (const auto& cell : table.cells[r]) {
      out << ',';
      csv_field(out, format_cell(cell));
    }
    out << '\n';
  }
}

void write_table_json(const AnalysisTable& table, std::ostream& out) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < table.rows(); ++r) {
    Json row = Json::object();
    row[table.row_key] = json_label(table.row_labels[r]);
    for (std::size_t c = 0; c < table.cols(); ++c) row[table.columns[c]] = json_cell(table.cells[r][c]);
    rows.push_back(std::move(row));
  }
  out << rows.dump(2) << '\n';
}

void write_table_text(const AnalysisTable& table, std::ostream& out) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({table.row_key});
  for (const auto& c : table.columns) grid.back().push_back(c);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    grid.push_back({table.row_labels[r]});
    for (const auto& cell : table.cells[r]) grid.back().push_back(format_cell(cell));
  }
  std::vector<std::size_t> width(table.cols() + 1, 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  for (const auto& line : grid) {
    std::string text;
    for (std::size_t c = 0; c < line.size(); ++c) {
      text += line[c];
      if (c + 1 < line.size()) text.append(width[c] - line[c].size() + 2, ' ');
    }
    out << text << '\n';
  }
}

void write_table(const AnalysisTable& table, OutputFormat format, std::ostream& out) {
  switch (format) {
    case OutputFormat::Csv: write_table_csv(table, out); return;
    case OutputFormat::Json: write_table_json(table, out); return;
    case OutputFormat::Text: write_table_text(table, out); return;
    case OutputFormat::Svg: break;
  }
  throw Error(Errc::InvalidArgument, "tables have no direct SVG form");
}

void write_cct_text(const Trace& trace, std::ostream& out) {
  const auto& cct = trace.cct.value();
  const auto& names = trace.events.strings();
  auto visit = [&](auto&& self, CctNodeId id, std::size_t depth) -> void {
    const auto& node = cct.node(id);
    out << std::string(2 * depth, ' ') << names.resolve(node.name_id) << " [" << id << "]\n";
    for (auto child : node.children) self(self, child, depth + 1);
  };
  for (auto root : cct.roots()) visit(visit, root, 0);
}

void write_cct_json(const Trace& trace, std::ostream& out) {
  const auto& cct = trace.cct.value();
  Json nodes = Json::array();
  for (const auto& node : cct.nodes()) {
    Json j = Json::object();
    j["node_id"] = node.id;
    j["name"] = trace.events.strings().resolve(node.name_id);
    j["parent"] = node.parent == kNoNode ? Json(nullptr) : Json(node.parent);
    nodes.push_back(std::move(j));
  }
  out << nodes.dump(2) << '\n';
}

}  // namespace tracekit

namespace tracekit {

AnalysisTable trace_summary(const Trace& trace) {
  const auto& t = trace.events;
  AnalysisTable table;
  table.row_key = "field";
  table.add_column("value");
  auto add = [&table](std::string field, Cell value) { table.add_row(std::move(field), {std::move(value)}); };
  add("events", static_cast<std::int64_t>(t.size()));
  add("processes", static_cast<std::int64_t>(t.process_ids().size()));
  add("streams", static_cast<std::int64_t>(t.is_sorted() ? t.streams().size() : 0));
  add("names", static_cast<std::int64_t>(t.strings().size()));
  std::int64_t counts[3] = {0, 0, 0};
  for (auto k : t.kinds()) ++counts[static_cast<int>(k)];
  add("enter_events", counts[0]);
  add("leave_events", counts[1]);
  add("instant_events", counts[2]);
  if (!t.empty()) {
    const auto [lo, hi] = time_span(trace);
    add("t_min_ns", lo);
    add("t_max_ns", hi);
    add("span_ns", hi - lo);
  }
  for (const auto& [key, value] : trace.metadata) add("meta." + key, value);
  return table;
}

}  // namespace tracekit
