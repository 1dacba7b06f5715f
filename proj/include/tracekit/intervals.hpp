#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace tracekit {

/// Sorted, disjoint, non-touching half-open integer intervals [lo, hi).
class IntervalSet {
 public:
  using Interval = std::pair<std::int64_t, std::int64_t>;

  IntervalSet() = default;
  /// Normalizes arbitrary (possibly overlapping, unsorted) input. Empty
  /// intervals are dropped.
  explicit IntervalSet(std::vector<Interval> intervals);

  void add(std::int64_t lo, std::int64_t hi);

  const std::vector<Interval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }
  std::int64_t measure() const;

  IntervalSet unite(const IntervalSet& other) const;
  IntervalSet intersect(const IntervalSet& other) const;
  IntervalSet subtract(const IntervalSet& other) const;

  friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

 private:
  void normalize();

  std::vector<Interval> intervals_;
};

}  // namespace tracekit
