#include "tracekit/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "tracekit/callgraph.hpp"
#include "tracekit/error.hpp"
#include "tracekit/profiles.hpp"

namespace tracekit {

namespace {

using Acc = long double;

/// Centered copy of the series plus per-window mean, standard deviation and
/// flatness. Centering by the global mean keeps the sliding dot products
/// small relative to the covariances they produce.
struct WindowStats {
  std::vector<Acc> x;
  std::vector<Acc> mu;
  std::vector<Acc> sigma;
  std::vector<bool> flat;
};

template <typename Scalar>
WindowStats window_stats(const Series<Scalar>& series, std::size_t m) {
  const auto n = static_cast<std::size_t>(series.size());
  WindowStats s;
  Acc mean = 0;
  for (std::size_t i = 0; i < n; ++i) mean += series[static_cast<Eigen::Index>(i)];
  mean /= static_cast<Acc>(n);
  s.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.x[i] = static_cast<Acc>(series[static_cast<Eigen::Index>(i)]) - mean;
  const auto l = n - m + 1;
  s.mu.resize(l);
  s.sigma.resize(l);
  s.flat.resize(l);
  for (std::size_t i = 0; i < l; ++i) {
    Acc sum = 0;
    for (std::size_t k = 0; k < m; ++k) sum += s.x[i + k];
    const Acc mu = sum / static_cast<Acc>(m);
    Acc var = 0;
    for (std::size_t k = 0; k < m; ++k) var += (s.x[i + k] - mu) * (s.x[i + k] - mu);
    s.mu[i] = mu;
    s.sigma[i] = std::sqrt(var / static_cast<Acc>(m));
    const auto first = series.segment(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
    s.flat[i] = first.minCoeff() == first.maxCoeff();
  }
  return s;
}

constexpr Acc kExactMatchUlps = 64;

/// Squared z-normalized distance from the raw dot product of the centered
/// windows starting at i and j.
Acc squared_distance(const WindowStats& s, std::size_t m, std::size_t i, std::size_t j, Acc dot) {
  const auto mm = static_cast<Acc>(m);
  if (s.flat[i] || s.flat[j]) return s.flat[i] && s.flat[j] ? 0 : 2 * mm;
  const Acc rho = (dot - mm * s.mu[i] * s.mu[j]) / (mm * s.sigma[i] * s.sigma[j]);
  // Within a few ulps of 1 the windows are identical after normalization;
  // the residue is rounding that sqrt would magnify.
  if (1 - rho <= kExactMatchUlps * std::numeric_limits<Acc>::epsilon()) return 0;
  return 2 * mm * (1 - rho);
}

Acc dot_at(const WindowStats& s, std::size_t m, std::size_t i, std::size_t j) {
  Acc dot = 0;
  for (std::size_t k = 0; k < m; ++k) dot += s.x[i + k] * s.x[j + k];
  return dot;
}

struct Nearest {
  std::vector<Acc> d2;
  std::vector<std::int64_t> index;

  explicit Nearest(std::size_t l) : d2(l, std::numeric_limits<Acc>::infinity()), index(l, -1) {}

  void offer(std::size_t i, std::size_t j, Acc value) {
    const auto jj = static_cast<std::int64_t>(j);
    if (value < d2[i] || (value == d2[i] && (index[i] < 0 || jj < index[i]))) {
      d2[i] = value;
      index[i] = jj;
    }
  }
};

/// Sliding dot products drift; recomputing at a fixed stride along each
/// diagonal bounds the error independently of how diagonals are scheduled.
constexpr std::size_t kReseedStride = 256;

void scan_diagonal(const WindowStats& s, std::size_t m, std::size_t k, Nearest& out) {
  const auto l = s.mu.size();
  Acc dot = 0;
  for (std::size_t i = 0; i + k < l; ++i) {
    const auto j = i + k;
    if (i % kReseedStride == 0) {
      dot = dot_at(s, m, i, j);
    } else {
      dot += s.x[i + m - 1] * s.x[j + m - 1] - s.x[i - 1] * s.x[j - 1];
    }
    const auto d2 = squared_distance(s, m, i, j, dot);
    out.offer(i, j, d2);
    out.offer(j, i, d2);
  }
}

}  // namespace

template <typename Scalar>
MatrixProfile<Scalar> matrix_profile(const Series<Scalar>& series, std::size_t m,
                                     std::optional<std::size_t> exclusion, unsigned workers) {
  if (m < 3) throw Error(Errc::BadWindow, "window " + std::to_string(m) + " is below 3");
  const auto n = static_cast<std::size_t>(series.size());
  const auto ex = exclusion.value_or(default_exclusion(m));
  if (n < m + ex + 1) {
    throw Error(Errc::SeriesTooShort, "series of length " + std::to_string(n) + " needs at least " +
                                          std::to_string(m + ex + 1) + " values for window " +
                                          std::to_string(m));
  }
  const auto stats = window_stats(series, m);
  const auto l = n - m + 1;
  const auto first = ex + 1;
  const auto diagonals = l > first ? l - first : 0;
  const auto threads = std::max<std::size_t>(1, std::min<std::size_t>(workers, diagonals));

  std::vector<Nearest> partial(threads, Nearest(l));
  auto work = [&](std::size_t w) {
    for (auto k = first + w; k < l; k += threads) scan_diagonal(stats, m, k, partial[w]);
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  auto& merged = partial.front();
  for (std::size_t w = 1; w < threads; ++w) {
    for (std::size_t i = 0; i < l; ++i) {
      if (partial[w].index[i] >= 0) merged.offer(i, static_cast<std::size_t>(partial[w].index[i]), partial[w].d2[i]);
    }
  }

  MatrixProfile<Scalar> mp;
  mp.window = m;
  mp.exclusion = ex;
  mp.profile.resize(static_cast<Eigen::Index>(l));
  mp.index = merged.index;
  for (std::size_t i = 0; i < l; ++i) {
    mp.profile[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(std::sqrt(merged.d2[i]));
  }
  return mp;
}

template MatrixProfile<double> matrix_profile<double>(const Series<double>&, std::size_t,
                                                      std::optional<std::size_t>, unsigned);
template MatrixProfile<long double> matrix_profile<long double>(const Series<long double>&, std::size_t,
                                                                std::optional<std::size_t>, unsigned);

TimeSeries event_durations(Trace& trace, std::string_view name) {
  ensure_time_metrics(trace);
  const auto& t = trace.events;
  std::vector<std::pair<Timestamp, Timestamp>> calls;
  if (auto id = t.strings().find(name)) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.kind(i) == EventKind::Enter && t.name_id(i) == *id) calls.emplace_back(t.timestamp(i), (*t.derived.inc_ns)[i]);
    }
  }
  std::stable_sort(calls.begin(), calls.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  TimeSeries out;
  out.values.resize(static_cast<Eigen::Index>(calls.size()));
  for (std::size_t k = 0; k < calls.size(); ++k) {
    out.values[static_cast<Eigen::Index>(k)] = static_cast<double>(calls[k].second);
    out.times.push_back(calls[k].first);
  }
  return out;
}

TimeSeries binned_exc(Trace& trace, std::string_view name, std::size_t bins) {
  const auto profile = time_profile(trace, {bins, false, {std::string(name)}});
  TimeSeries out;
  out.values = Series<double>::Zero(static_cast<Eigen::Index>(bins));
  const auto col = profile.column_index(name);
  for (std::size_t k = 0; k < bins; ++k) {
    out.times.push_back(std::stoll(profile.row_labels[k]));
    if (col) out.values[static_cast<Eigen::Index>(k)] = profile.number(k, *col);
  }
  return out;
}

TimeSeries event_rate(const Trace& trace, std::size_t bins) {
  if (bins == 0) throw Error(Errc::BadBinCount, "bin count must be at least 1");
  const auto [lo, hi] = time_span(trace);
  const auto edges = bin_edges(lo, hi, bins);
  TimeSeries out;
  out.values = Series<double>::Zero(static_cast<Eigen::Index>(bins));
  out.times.assign(edges.begin(), edges.end() - 1);
  const auto& t = trace.events;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Leave) out.values[static_cast<Eigen::Index>(bin_of(edges, t.timestamp(i)))] += 1;
  }
  return out;
}

PatternResult pattern_detection(Trace& trace, std::string_view start_event, const PatternOptions& options) {
  const auto& t = trace.events;
  std::map<ProcessId, std::vector<Timestamp>> occurrences;
  if (auto id = t.strings().find(start_event)) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.name_id(i) == *id && t.kind(i) != EventKind::Leave) occurrences[t.process(i)].push_back(t.timestamp(i));
    }
  }
  const std::vector<Timestamp>* times = nullptr;
  PatternResult result;
  for (const auto& [rank, list] : occurrences) {
    if (!times || list.size() > times->size()) {
      times = &list;
      result.process = rank;
    }
  }
  if (!times || times->size() < 2) {
    throw Error(Errc::NoOccurrences, "'" + std::string(start_event) + "' occurs fewer than twice on every process");
  }
  auto ts = *times;
  std::sort(ts.begin(), ts.end());
  const auto n = ts.size() - 1;
  Series<double> gaps(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) gaps[static_cast<Eigen::Index>(k)] = static_cast<double>(ts[k + 1] - ts[k]);

  auto emit = [&](std::size_t first, std::size_t period, auto keep) {
    result.period = period;
    for (auto s = first; s + period <= n; s += period) {
      if (keep(s)) result.spans.push_back({ts[s], ts[s + period]});
    }
  };
  if (gaps.minCoeff() == gaps.maxCoeff()) {
    emit(0, 1, [](std::size_t) { return true; });
    return result;
  }

  const auto m = options.window.value_or(default_window(n));
  result.window = m;
  const auto mp = matrix_profile(gaps, m, std::nullopt, options.workers);
  const double threshold = options.threshold_fraction * 2 * std::sqrt(static_cast<double>(m));
  const auto l = static_cast<std::size_t>(mp.profile.size());
  std::vector<bool> motif(l, false);
  std::optional<std::size_t> first;
  std::size_t period = 0;
  for (std::size_t i = 0; i < l; ++i) {
    if (mp.index[i] < 0 || mp.profile[static_cast<Eigen::Index>(i)] > threshold) continue;
    motif[i] = true;
    if (!first) first = i;
    const auto gap = static_cast<std::size_t>(std::abs(mp.index[i] - static_cast<std::int64_t>(i)));
    if (period == 0 || gap < period) period = gap;
  }
  if (!first) return result;

  // A repeat at distance p also repeats at every divisor that is itself a
  // period; the exclusion zone hides the short ones from the profile.
  const auto stats = window_stats(gaps, m);
  for (std::size_t d = 1; d < period; ++d) {
    if (period % d != 0 || *first + d >= l) continue;
    const auto d2 = squared_distance(stats, m, *first, *first + d, dot_at(stats, m, *first, *first + d));
    if (std::sqrt(static_cast<double>(d2)) <= threshold) {
      period = d;
      break;
    }
  }
  emit(*first, period, [&](std::size_t s) { return s >= l || motif[s]; });
  return result;
}

}  // namespace tracekit
