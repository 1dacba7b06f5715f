#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "tracekit/error.hpp"
#include "tracekit/profiles.hpp"
#include "tracekit/query.hpp"

namespace tracekit {

AnalysisTable multi_run_analysis(std::vector<Trace>& traces, const MultiRunOptions& options) {
  if (traces.size() < 2) {
    throw Error(Errc::TooFewRuns, "need at least 2 runs, got " + std::to_string(traces.size()));
  }
  if (!options.labels.empty() && options.labels.size() != traces.size()) {
    throw Error(Errc::InvalidArgument, std::to_string(options.labels.size()) + " labels for " +
                                           std::to_string(traces.size()) + " runs");
  }
  std::vector<AnalysisTable> profiles;
  for (auto& t : traces) profiles.push_back(flat_profile(t, {options.metric, GroupBy::Name, false}));

  const Cell zero = options.metric.is_time() ? Cell{std::int64_t{0}} : Cell{0.0};
  std::map<std::string, std::vector<Cell>> rows;
  for (std::size_t r = 0; r < profiles.size(); ++r) {
    for (std::size_t i = 0; i < profiles[r].rows(); ++i) {
      auto [it, fresh] = rows.try_emplace(profiles[r].row_labels[i], traces.size(), zero);
      it->second[r] = profiles[r].at(i, 0);
    }
  }
  auto peak = [](const std::vector<Cell>& cells) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& c : cells) {
      best = std::max(best, std::holds_alternative<std::int64_t>(c) ? static_cast<double>(std::get<std::int64_t>(c))
                                                                    : std::get<double>(c));
    }
    return best;
  };
  std::vector<std::pair<std::string, std::vector<Cell>>> ordered(rows.begin(), rows.end());
  std::stable_sort(ordered.begin(), ordered.end(),
                   [&](const auto& a, const auto& b) { return peak(a.second) > peak(b.second); });

  AnalysisTable table;
  table.row_key = "name";
  std::set<std::string> used;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    std::string label = options.labels.empty() ? std::to_string(traces[r].events.process_ids().size())
                                               : options.labels[r];
    auto unique = label;
    for (int k = 2; used.contains(unique); ++k) unique = label + "#" + std::to_string(k);
    used.insert(unique);
    table.add_column(unique, profiles[r].units.front());
  }
  for (auto& [name, cells] : ordered) table.add_row(name, std::move(cells));
  return table;
}

}  // namespace tracekit
