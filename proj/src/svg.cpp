#include "tracekit/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "tracekit/callgraph.hpp"
#include "tracekit/comm.hpp"
#include "tracekit/error.hpp"
#include "tracekit/report.hpp"

namespace tracekit {

namespace {

constexpr std::array<std::string_view, 20> kPalette = {
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c", "#98df8a", "#d62728",
    "#ff9896", "#9467bd", "#c5b0d5", "#8c564b", "#c49c94", "#e377c2", "#f7b6d2",
    "#7f7f7f", "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5"};

constexpr std::string_view kBackground = "#ffffff";

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v + 0.0);
  std::string s(buf);
  return s == "-0.00" ? "0.00" : s;
}

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// Display-only number for labels.
std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void open_svg(std::ostream& out, double width, double height) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  out << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"" << kBackground << "\"/>\n";
}

struct TimeUnit {
  double scale;
  std::string_view suffix;
};

TimeUnit time_unit(Timestamp span) {
  if (span >= 10'000'000'000) return {1e9, "s"};
  if (span >= 10'000'000) return {1e6, "ms"};
  if (span >= 10'000) return {1e3, "us"};
  return {1, "ns"};
}

}  // namespace

std::string_view color_for(std::string_view name) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return kPalette[h % kPalette.size()];
}

std::string render_timeline(Trace& trace, const TimelineOptions& options) {
  if (trace.events.empty()) throw Error(Errc::EmptyTrace, "timeline of an empty trace");
  ensure_matching(trace);
  const auto& t = trace.events;
  const auto& matching = *t.derived.matching_index;
  const auto& depth = *t.derived.depth;

  auto [lo, hi] = options.range.value_or(time_span(trace));
  if (hi <= lo) hi = lo + 1;
  constexpr double kLeft = 90;
  constexpr double kTop = 20;
  constexpr double kWidth = 1000;
  constexpr double kLane = 16;
  const auto x = [&](Timestamp ts) {
    return kLeft + static_cast<double>(ts - lo) / static_cast<double>(hi - lo) * kWidth;
  };

  const auto streams = t.streams();
  std::vector<std::size_t> lane_offset(streams.size() + 1, 0);
  std::vector<std::size_t> stream_of(t.size());
  std::map<std::pair<ProcessId, ThreadId>, std::size_t> stream_index;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    std::int32_t lanes = 1;
    for (auto i = streams[s].first; i < streams[s].second; ++i) {
      stream_of[i] = s;
      lanes = std::max(lanes, depth[i] + 1);
    }
    lane_offset[s + 1] = lane_offset[s] + static_cast<std::size_t>(lanes);
    stream_index[{t.process(streams[s].first), t.thread(streams[s].first)}] = s;
  }
  const auto y = [&](std::size_t row) {
    return kTop + static_cast<double>(lane_offset[stream_of[row]] + static_cast<std::size_t>(depth[row])) * kLane;
  };
  const double plot_height = static_cast<double>(lane_offset.back()) * kLane;

  std::vector<std::size_t> bars;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Enter || matching[i] == kNoRow) continue;
    const auto s = t.timestamp(i);
    const auto e = t.timestamp(static_cast<std::size_t>(matching[i]));
    if ((s < hi && e > lo) || (s == e && s >= lo && s <= hi)) bars.push_back(i);
  }
  const auto duration = [&](std::size_t i) {
    return t.timestamp(static_cast<std::size_t>(matching[i])) - t.timestamp(i);
  };
  if (bars.size() > options.max_events) {
    const auto total = bars.size();
    std::stable_sort(bars.begin(), bars.end(), [&](auto a, auto b) { return duration(a) > duration(b); });
    bars.resize(options.max_events);
    std::sort(bars.begin(), bars.end());
    if (options.log) {
      *options.log << "timeline: drew " << bars.size() << " of " << total << " calls, dropped "
                   << total - bars.size() << " shortest\n";
    }
  }

  std::ostringstream out;
  const double width = kLeft + kWidth + 20;
  const double height = kTop + plot_height + 40;
  open_svg(out, width, height);
  for (std::size_t s = 0; s < streams.size(); ++s) {
    const auto row = streams[s].first;
    out << "<text class=\"lane-label\" x=\"4\" y=\"" << num(kTop + static_cast<double>(lane_offset[s]) * kLane + 11)
        << "\">P" << t.process(row) << " T" << t.thread(row) << "</text>\n";
  }
  for (const auto& span : options.spans) {
    const auto a = std::clamp(span.start, lo, hi);
    const auto b = std::clamp(span.end, lo, hi);
    out << "<rect class=\"span\" x=\"" << num(x(a)) << "\" y=\"" << num(kTop) << "\" width=\"" << num(x(b) - x(a))
        << "\" height=\"" << num(plot_height) << "\" fill=\"#ffd700\" fill-opacity=\"0.15\"/>\n";
  }
  for (auto i : bars) {
    const auto a = std::max(t.timestamp(i), lo);
    const auto b = std::min(t.timestamp(static_cast<std::size_t>(matching[i])), hi);
    out << "<rect class=\"call\" x=\"" << num(x(a)) << "\" y=\"" << num(y(i) + 1) << "\" width=\""
        << num(std::max(0.0, x(b) - x(a))) << "\" height=\"" << num(kLane - 2) << "\" fill=\"" << color_for(t.name(i))
        << "\"><title>" << escape(t.name(i)) << "</title></rect>\n";
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Instant || t.timestamp(i) < lo || t.timestamp(i) > hi) continue;
    const double cx = x(t.timestamp(i));
    const double cy = y(i) + kLane / 2;
    out << "<polygon class=\"instant\" points=\"" << num(cx) << ',' << num(cy - 5) << ' ' << num(cx + 5) << ','
        << num(cy) << ' ' << num(cx) << ',' << num(cy + 5) << ' ' << num(cx - 5) << ',' << num(cy)
        << "\" fill=\"#333333\"><title>" << escape(t.name(i)) << "</title></polygon>\n";
  }
  if (options.arrows) {
    for (const auto& m : match_messages(trace).matched) {
      if (m.send_ts > hi || *m.recv_ts < lo) continue;
      out << "<line class=\"message\" x1=\"" << num(x(m.send_ts)) << "\" y1=\"" << num(y(m.send_row) + kLane / 2)
          << "\" x2=\"" << num(x(*m.recv_ts)) << "\" y2=\"" << num(y(*m.recv_row) + kLane / 2)
          << "\" stroke=\"#000000\" stroke-width=\"0.8\"/>\n";
    }
  }
  if (options.path && !options.path->segments.empty()) {
    out << "<polyline class=\"critical-path\" fill=\"none\" stroke=\"#e31a1c\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& seg : options.path->segments) {
      const auto s = stream_index.at({seg.process, seg.thread});
      const double py = kTop + static_cast<double>(lane_offset[s]) * kLane + kLane / 2;
      for (auto ts : {seg.t_start, seg.t_end}) {
        out << (first ? "" : " ") << num(x(std::clamp(ts, lo, hi))) << ',' << num(py);
        first = false;
      }
    }
    out << "\"/>\n";
  }

  const double axis_y = kTop + plot_height + 5;
  const auto unit = time_unit(hi - lo);
  out << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(axis_y) << "\" x2=\"" << num(kLeft + kWidth)
      << "\" y2=\"" << num(axis_y) << "\" stroke=\"#000000\"/>\n";
  constexpr int kTicks = 5;
  for (int k = 0; k <= kTicks; ++k) {
    const double ts = static_cast<double>(lo) + static_cast<double>(hi - lo) * k / kTicks;
    const double tx = kLeft + kWidth * k / kTicks;
    out << "<text class=\"tick\" x=\"" << num(tx) << "\" y=\"" << num(axis_y + 14) << "\" text-anchor=\"middle\">"
        << short_number(ts / unit.scale) << ' ' << unit.suffix << "</text>\n";
  }
  out << "<desc class=\"range\">" << lo << ' ' << hi << "</desc>\n";
  out << "</svg>\n";
  return out.str();
}

std::string render_heatmap(const AnalysisTable& table, Colormap colormap) {
  if (table.rows() != table.cols()) {
    throw Error(Errc::NonSquare, std::to_string(table.rows()) + " x " + std::to_string(table.cols()) + " table");
  }
  const auto n = table.rows();
  double max = 0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) max = std::max(max, table.number(r, c));
  }
  constexpr double kMargin = 50;
  const double cell = n > 0 ? std::clamp(600.0 / static_cast<double>(n), 2.0, 40.0) : 40.0;
  const double size = kMargin + cell * static_cast<double>(n) + 20;

  std::ostringstream out;
  open_svg(out, size, size + 20);
  out << "<text class=\"title\" x=\"" << num(kMargin) << "\" y=\"14\">" << escape(table.row_key) << " x receiver ("
      << (colormap == Colormap::Log ? "log" : "linear") << ", max " << short_number(max) << ")</text>\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double v = table.number(r, c);
      if (v <= 0 || max <= 0) continue;
      const double f = colormap == Colormap::Log ? std::log1p(v) / std::log1p(max) : v / max;
      auto mix = [f](int light, int dark) { return static_cast<int>(std::lround(light + (dark - light) * f)); };
      char color[8];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", mix(255, 8), mix(255, 48), mix(255, 107));
      out << "<rect class=\"cell\" x=\"" << num(kMargin + cell * static_cast<double>(c)) << "\" y=\""
          << num(kMargin + cell * static_cast<double>(r)) << "\" width=\"" << num(cell) << "\" height=\"" << num(cell)
          << "\" fill=\"" << color << "\"><title>" << table.row_labels[r] << " -> " << table.columns[c] << ": "
          << format_cell(Cell{v}) << "</title></rect>\n";
    }
  }
  out << "<rect class=\"frame\" x=\"" << num(kMargin) << "\" y=\"" << num(kMargin) << "\" width=\""
      << num(cell * static_cast<double>(n)) << "\" height=\"" << num(cell * static_cast<double>(n))
      << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.5\"/>\n";
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(12.0 / cell)));
  for (std::size_t k = 0; k < n; k += stride) {
    const double mid = kMargin + cell * (static_cast<double>(k) + 0.5);
    out << "<text class=\"row-label\" x=\"" << num(kMargin - 4) << "\" y=\"" << num(mid + 3)
        << "\" text-anchor=\"end\">" << escape(table.row_labels[k]) << "</text>\n";
    out << "<text class=\"col-label\" x=\"" << num(mid) << "\" y=\"" << num(kMargin - 4)
        << "\" text-anchor=\"middle\">" << escape(table.columns[k]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_stacked_bars(const AnalysisTable& table, std::string_view title) {
  constexpr double kLeft = 60;
  constexpr double kTop = 30;
  constexpr double kWidth = 800;
  constexpr double kHeight = 300;
  const auto rows = table.rows();
  double max_total = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0;
    for (std::size_t c = 0; c < table.cols(); ++c) total += std::max(0.0, table.number(r, c));
    max_total = std::max(max_total, total);
  }
  const double slot = rows > 0 ? kWidth / static_cast<double>(rows) : kWidth;
  const double bar = slot * 0.8;
  const double scale = max_total > 0 ? kHeight / max_total : 0;
  const double legend_top = kTop + kHeight + 30;

  std::ostringstream out;
  open_svg(out, kLeft + kWidth + 20, legend_top + 14 * static_cast<double>(table.cols()) + 10);
  out << "<text class=\"title\" x=\"" << num(kLeft) << "\" y=\"16\">" << escape(title.empty() ? table.row_key : title)
      << " (max " << short_number(max_total) << ")</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    double base = kTop + kHeight;
    const double bx = kLeft + slot * static_cast<double>(r) + (slot - bar) / 2;
    out << "<g class=\"stack\" data-row=\"" << escape(table.row_labels[r]) << "\">\n";
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const double v = table.number(r, c);
      if (v <= 0) continue;
      const double h = v * scale;
      base -= h;
      out << "<rect class=\"segment\" x=\"" << num(bx) << "\" y=\"" << num(base) << "\" width=\"" << num(bar)
          << "\" height=\"" << num(h) << "\" fill=\"" << color_for(table.columns[c]) << "\"><title>"
          << escape(table.columns[c]) << ": " << format_cell(Cell{v}) << "</title></rect>\n";
    }
    out << "</g>\n";
  }
  out << "<line class=\"axis\" x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + kHeight) << "\" x2=\""
      << num(kLeft + kWidth) << "\" y2=\"" << num(kTop + kHeight) << "\" stroke=\"#000000\"/>\n";
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(40.0 / slot)));
  for (std::size_t r = 0; r < rows; r += stride) {
    out << "<text class=\"row-label\" x=\"" << num(kLeft + slot * (static_cast<double>(r) + 0.5)) << "\" y=\""
        << num(kTop + kHeight + 12) << "\" text-anchor=\"middle\">" << escape(table.row_labels[r]) << "</text>\n";
  }
  for (std::size_t c = 0; c < table.cols(); ++c) {
    const double ly = legend_top + 14 * static_cast<double>(c);
    out << "<rect class=\"legend\" x=\"" << num(kLeft) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
        << color_for(table.columns[c]) << "\"/>\n";
    out << "<text x=\"" << num(kLeft + 14) << "\" y=\"" << num(ly) << "\">" << escape(table.columns[c]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tracekit
