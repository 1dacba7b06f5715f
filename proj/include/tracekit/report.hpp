#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "tracekit/trace_model.hpp"

namespace tracekit {

enum class OutputFormat { Csv, Json, Text, Svg };

std::optional<OutputFormat> parse_output_format(std::string_view text);

/// Exact text of a cell: integers in decimal, doubles in shortest
/// round-trip form, strings verbatim.
std::string format_cell(const Cell& cell);

/// Header `row_key,columns...`, one line per row.
void write_table_csv(const AnalysisTable& table, std::ostream& out);
/// Array of objects keyed by row_key and column names, in table order.
/// Integer-looking row labels are emitted as numbers.
void write_table_json(const AnalysisTable& table, std::ostream& out);
/// Left-aligned columns for terminals.
void write_table_text(const AnalysisTable& table, std::ostream& out);
void write_table(const AnalysisTable& table, OutputFormat format, std::ostream& out);

/// One line per node, indented two spaces per level, children in creation
/// order. Requires a built CCT.
void write_cct_text(const Trace& trace, std::ostream& out);
/// Array of {node_id, name, parent} (parent null for roots).
void write_cct_json(const Trace& trace, std::ostream& out);

}  // namespace tracekit

namespace tracekit {

/// field/value overview: event, process, thread and function counts, the
/// time span, and the reader metadata.
AnalysisTable trace_summary(const Trace& trace);

}  // namespace tracekit
