#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tracekit/trace_model.hpp"

namespace tracekit {

/// Canonical CSV header. Shorter forms without `thread` and/or `attributes`
/// are accepted on read; the writer always emits this one.
inline constexpr std::string_view kCsvHeader = "timestamp,event_type,name,process,thread,attributes";

struct CsvOptions {
  char delimiter = ',';
  /// Strict: a malformed row throws MalformedRow. Lenient: the row is skipped
  /// and counted in metadata["skipped_rows"].
  bool strict = false;
};

struct ChromeOptions {
  /// Strict: unbalanced B/E nesting throws UnbalancedBE.
  bool strict = false;
};

enum class TraceFormat { Csv, Chrome };

/// Guesses the format from the extension (.json -> Chrome, else CSV).
TraceFormat detect_format(const std::filesystem::path& path);

Trace read_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Trace parse_csv(std::string_view content, const CsvOptions& options = {});

void write_csv(const Trace& trace, const std::filesystem::path& path);
void write_csv(const Trace& trace, std::ostream& out);
std::string to_csv_string(const Trace& trace);

/// Attribute column encoding: `k=v` pairs joined by `;`, keys sorted, with
/// `\`, `;` and `=` backslash-escaped. A string value that would otherwise
/// read back as a number gets its first character escaped.
std::string encode_attrs(const AttrMap& attrs);
AttrMap decode_attrs(std::string_view text);

Trace read_chrome(const std::filesystem::path& path, const ChromeOptions& options = {});
Trace parse_chrome(std::string_view content, const ChromeOptions& options = {});

/// Converts a decimal microsecond count to nanoseconds, rounding half up.
Timestamp micros_to_nanos(double micros);

Trace read_trace(const std::filesystem::path& path, TraceFormat format, bool strict = false);

/// Reads per-process files on up to `workers` threads and merges them. The
/// result does not depend on `workers` or on completion order. Throws
/// DuplicateProcess when two files contain the same rank.
Trace read_parallel(const std::vector<std::filesystem::path>& paths, TraceFormat format,
                    unsigned workers, bool strict = false);

/// Merge of already-read per-process traces, in the given order.
Trace merge_traces(std::vector<Trace> parts);

}  // namespace tracekit
