#include "tracekit/intervals.hpp"

#include <algorithm>

namespace tracekit {

IntervalSet::IntervalSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  normalize();
}

void IntervalSet::normalize() {
  std::erase_if(intervals_, [](const Interval& iv) { return iv.second <= iv.first; });
  std::sort(intervals_.begin(), intervals_.end());
  std::vector<Interval> merged;
  merged.reserve(intervals_.size());
  for (const auto& iv : intervals_) {
    if (!merged.empty() && iv.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, iv.second);
    } else {
      merged.push_back(iv);
    }
  }
  intervals_ = std::move(merged);
}

void IntervalSet::add(std::int64_t lo, std::int64_t hi) {
  if (hi <= lo) return;
  // Appending in order is the common case; fall back to a full normalize.
  if (intervals_.empty() || lo > intervals_.back().second) {
    intervals_.emplace_back(lo, hi);
  } else if (lo >= intervals_.back().first) {
    intervals_.back().second = std::max(intervals_.back().second, hi);
  } else {
    intervals_.emplace_back(lo, hi);
    normalize();
  }
}

std::int64_t IntervalSet::measure() const {
  std::int64_t total = 0;
  for (const auto& [lo, hi] : intervals_) total += hi - lo;
  return total;
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return IntervalSet(std::move(all));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
  IntervalSet out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < intervals_.size() && j < other.intervals_.size()) {
    const auto lo = std::max(intervals_[i].first, other.intervals_[j].first);
    const auto hi = std::min(intervals_[i].second, other.intervals_[j].second);
    if (lo < hi) out.intervals_.emplace_back(lo, hi);
    if (intervals_[i].second < other.intervals_[j].second) {
      ++i;
    } else {
      ++j;
    }
  }
  return out;
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
  IntervalSet out;
  std::size_t j = 0;
  for (auto [lo, hi] : intervals_) {
    while (j < other.intervals_.size() && other.intervals_[j].second <= lo) ++j;
    auto cur = lo;
    for (auto k = j; k < other.intervals_.size() && other.intervals_[k].first < hi; ++k) {
      if (other.intervals_[k].first > cur) out.intervals_.emplace_back(cur, other.intervals_[k].first);
      cur = std::max(cur, other.intervals_[k].second);
    }
    if (cur < hi) out.intervals_.emplace_back(cur, hi);
  }
  return out;
}

}  // namespace tracekit
