#pragma once

#include <Eigen/Core>
#include <optional>
#include <string_view>
#include <vector>

#include "tracekit/trace_model.hpp"

namespace tracekit {

template <typename Scalar>
using Series = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct MatrixProfile {
  std::size_t window = 0;
  std::size_t exclusion = 0;
  /// Per subsequence start: distance to its nearest non-trivial match, +inf
  /// when every other start lies in the exclusion zone.
  Series<Scalar> profile;
  /// Start of that match (smallest on ties), -1 with an infinite profile.
  std::vector<std::int64_t> index;
};

/// z-normalized Euclidean matrix profile over windows of length `m`,
/// excluding matches with |i - j| <= exclusion (default ceil(m/2)).
/// Zero-variance windows are at distance 0 from each other and sqrt(2m)
/// from any other window. The result does not depend on `workers`.
/// Throws BadWindow for m < 3 and SeriesTooShort for n < m + exclusion + 1.
template <typename Scalar>
MatrixProfile<Scalar> matrix_profile(const Series<Scalar>& series, std::size_t m,
                                     std::optional<std::size_t> exclusion = std::nullopt,
                                     unsigned workers = 1);

inline std::size_t default_exclusion(std::size_t m) { return (m + 1) / 2; }

/// Default window for a series of length n: max(4, n / 10).
inline std::size_t default_window(std::size_t n) { return std::max<std::size_t>(4, n / 10); }

/// A derived sequence plus the timestamp each element starts at.
struct TimeSeries {
  Series<double> values;
  std::vector<Timestamp> times;
};

/// Inclusive durations of every call to `name`, in start order.
TimeSeries event_durations(Trace& trace, std::string_view name);
/// Exclusive time of `name` per equal-width time bin.
TimeSeries binned_exc(Trace& trace, std::string_view name, std::size_t bins);
/// Number of Enter and Instant events per equal-width time bin.
TimeSeries event_rate(const Trace& trace, std::size_t bins);

struct PatternOptions {
  std::optional<std::size_t> window;
  /// Motif threshold as a fraction of the largest possible z-normalized
  /// distance, 2 sqrt(m).
  double threshold_fraction = 0.05;
  unsigned workers = 1;
};

struct Span {
  Timestamp start = 0;
  Timestamp end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct PatternResult {
  std::vector<Span> spans;
  /// Occurrences of the start event per repetition.
  std::size_t period = 0;
  ProcessId process = 0;
  std::size_t window = 0;
};

/// Repetitions of the interval structure between consecutive occurrences
/// (Enter or Instant) of `start_event` on the process where it occurs most.
/// Span endpoints are occurrence timestamps; spans are disjoint and sorted.
/// Throws NoOccurrences with fewer than two occurrences.
PatternResult pattern_detection(Trace& trace, std::string_view start_event, const PatternOptions& options = {});

}  // namespace tracekit
