#include "tracekit/comm.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <tuple>

#include "tracekit/callgraph.hpp"
#include "tracekit/error.hpp"
#include "tracekit/intervals.hpp"
#include "tracekit/profiles.hpp"

namespace tracekit {

namespace {

std::optional<std::int64_t> int_attr(const AttrMap& attrs, std::string_view key) {
  const auto* v = attrs.find(key);
  if (!v) return std::nullopt;
  if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
  if (const auto* d = std::get_if<double>(v)) return static_cast<std::int64_t>(*d);
  return std::nullopt;
}

ProcessId rank_count(const Trace& trace, const std::vector<MessageRecord>& sends) {
  ProcessId max_rank = 0;
  for (auto p : trace.events.process_ids()) max_rank = std::max(max_rank, p);
  for (const auto& m : sends) max_rank = std::max({max_rank, m.sender, m.receiver});
  return max_rank + 1;
}

std::vector<MessageRecord> require_sends(const Trace& trace, MessageMatch& match) {
  match = match_messages(trace);
  auto sends = match.all_sends();
  if (sends.empty()) throw Error(Errc::NoCommData, "trace contains no send records");
  return sends;
}

std::int64_t measure_of(const MessageRecord& m, CommMeasure measure) {
  return measure == CommMeasure::Size ? m.bytes : 1;
}

std::string measure_unit(CommMeasure measure) { return measure == CommMeasure::Size ? "bytes" : "messages"; }

}  // namespace

std::vector<MessageRecord> MessageMatch::all_sends() const {
  std::vector<MessageRecord> out = matched;
  out.insert(out.end(), unmatched_sends.begin(), unmatched_sends.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.send_row < b.send_row; });
  return out;
}

MessageMatch match_messages(const Trace& trace, const MessageMatchOptions& options) {
  const auto& t = trace.events;
  MessageMatch out;
  const auto send_id = t.strings().find(kSendEvent);
  const auto recv_id = t.strings().find(kRecvEvent);
  if (!send_id && !recv_id) return out;

  using Channel = std::tuple<ProcessId, ProcessId, std::int64_t>;
  struct Side {
    std::vector<std::size_t> sends;
    std::vector<std::size_t> recvs;
  };
  std::map<Channel, Side> channels;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.kind(i) != EventKind::Instant) continue;
    const bool is_send = send_id && t.name_id(i) == *send_id;
    const bool is_recv = recv_id && t.name_id(i) == *recv_id;
    if (!is_send && !is_recv) continue;
    auto partner = int_attr(t.attrs(i), "partner");
    if (!partner || *partner < 0 ||
        (!options.allow_self_messages && static_cast<ProcessId>(*partner) == t.process(i))) {
      ++out.ignored;
      continue;
    }
    const auto tag = int_attr(t.attrs(i), "tag").value_or(0);
    const auto other = static_cast<ProcessId>(*partner);
    if (is_send) {
      channels[{t.process(i), other, tag}].sends.push_back(i);
    } else {
      channels[{other, t.process(i), tag}].recvs.push_back(i);
    }
  }

  auto by_time = [&t](std::size_t a, std::size_t b) {
    return std::tie(t.timestamps()[a], a) < std::tie(t.timestamps()[b], b);
  };
  for (auto& [channel, side] : channels) {
    std::sort(side.sends.begin(), side.sends.end(), by_time);
    std::sort(side.recvs.begin(), side.recvs.end(), by_time);
    const auto [sender, receiver, tag] = channel;
    for (std::size_t k = 0; k < side.sends.size(); ++k) {
      const auto s = side.sends[k];
      MessageRecord m;
      m.sender = sender;
      m.receiver = receiver;
      m.tag = tag;
      m.send_ts = t.timestamp(s);
      m.send_row = s;
      auto bytes = int_attr(t.attrs(s), "size");
      if (k < side.recvs.size()) {
        const auto r = side.recvs[k];
        m.recv_ts = t.timestamp(r);
        m.recv_row = r;
        if (!bytes) bytes = int_attr(t.attrs(r), "size");
        m.bytes = std::max<std::int64_t>(0, bytes.value_or(0));
        out.matched.push_back(m);
      } else {
        m.bytes = std::max<std::int64_t>(0, bytes.value_or(0));
        out.unmatched_sends.push_back(m);
      }
    }
    for (auto k = side.sends.size(); k < side.recvs.size(); ++k) out.unmatched_recvs.push_back(side.recvs[k]);
  }
  auto by_row = [](const MessageRecord& a, const MessageRecord& b) { return a.send_row < b.send_row; };
  std::sort(out.matched.begin(), out.matched.end(), by_row);
  std::sort(out.unmatched_sends.begin(), out.unmatched_sends.end(), by_row);
  std::sort(out.unmatched_recvs.begin(), out.unmatched_recvs.end());
  return out;
}

CommMatrix comm_matrix_dense(const Trace& trace, CommMeasure measure) {
  MessageMatch match;
  const auto sends = require_sends(trace, match);
  const auto p = rank_count(trace, sends);
  CommMatrix m = CommMatrix::Zero(p, p);
  for (const auto& s : sends) m(s.sender, s.receiver) += measure_of(s, measure);
  return m;
}

AnalysisTable comm_matrix(const Trace& trace, CommMeasure measure) {
  const auto m = comm_matrix_dense(trace, measure);
  AnalysisTable table;
  table.row_key = "sender";
  for (Eigen::Index j = 0; j < m.cols(); ++j) table.add_column(std::to_string(j), measure_unit(measure));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<Cell> row;
    row.reserve(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.emplace_back(m(i, j));
    table.add_row(std::to_string(i), std::move(row));
  }
  return table;
}

AnalysisTable message_histogram(const Trace& trace, std::size_t bins) {
  if (bins == 0) throw Error(Errc::BadBinCount, "bin count must be at least 1");
  MessageMatch match;
  const auto sends = require_sends(trace, match);
  auto [lo, hi] = std::minmax_element(sends.begin(), sends.end(),
                                      [](const auto& a, const auto& b) { return a.bytes < b.bytes; });
  const auto edges = bin_edges(lo->bytes, hi->bytes, bins);
  std::vector<std::int64_t> counts(bins, 0);
  for (const auto& s : sends) ++counts[bin_of(edges, s.bytes)];

  AnalysisTable table;
  table.row_key = "bin";
  table.add_column("bin_lo", "bytes");
  table.add_column("bin_hi", "bytes");
  table.add_column("count", "messages");
  for (std::size_t k = 0; k < bins; ++k) {
    table.add_row(std::to_string(k), {Cell{edges[k]}, Cell{edges[k + 1]}, Cell{counts[k]}});
  }
  return table;
}

AnalysisTable comm_by_process(const Trace& trace, CommMeasure measure) {
  MessageMatch match;
  const auto sends = require_sends(trace, match);
  const auto p = rank_count(trace, sends);
  std::vector<std::int64_t> sent(p, 0);
  std::vector<std::int64_t> received(p, 0);
  for (const auto& s : sends) {
    sent[s.sender] += measure_of(s, measure);
    if (s.recv_row) received[s.receiver] += measure_of(s, measure);
  }
  AnalysisTable table;
  table.row_key = "process";
  table.add_column("sent", measure_unit(measure));
  table.add_column("received", measure_unit(measure));
  for (ProcessId r = 0; r < p; ++r) table.add_row(std::to_string(r), {Cell{sent[r]}, Cell{received[r]}});
  return table;
}

AnalysisTable comm_over_time(const Trace& trace, std::size_t bins, bool by_receive) {
  if (bins == 0) throw Error(Errc::BadBinCount, "bin count must be at least 1");
  MessageMatch match;
  const auto sends = require_sends(trace, match);
  const auto [t_min, t_max] = time_span(trace);
  const auto edges = bin_edges(t_min, t_max, bins);
  std::vector<std::int64_t> count(bins, 0);
  std::vector<std::int64_t> volume(bins, 0);
  for (const auto& s : sends) {
    if (by_receive && !s.recv_ts) continue;
    const auto k = bin_of(edges, by_receive ? *s.recv_ts : s.send_ts);
    ++count[k];
    volume[k] += s.bytes;
  }
  AnalysisTable table;
  table.row_key = "bin_start_ns";
  table.add_column("count", "messages");
  table.add_column("volume", "bytes");
  for (std::size_t k = 0; k < bins; ++k) {
    table.add_row(std::to_string(edges[k]), {Cell{count[k]}, Cell{volume[k]}});
  }
  return table;
}

bool CommPredicate::operator()(std::string_view name) const {
  for (const auto& p : prefixes) {
    if (name.starts_with(p)) return true;
  }
  for (const auto& n : names) {
    if (name == n) return true;
  }
  for (const auto& s : substrings) {
    if (name.find(s) != std::string_view::npos) return true;
  }
  return false;
}

AnalysisTable comm_comp_breakdown(Trace& trace, const CommPredicate& is_comm) {
  if (trace.events.empty()) throw Error(Errc::EmptyTrace, "comm_comp_breakdown on an empty trace");
  ensure_matching(trace);
  const auto& t = trace.events;
  const auto& matching = *t.derived.matching_index;
  const auto children = child_calls(t);

  std::vector<bool> comm_name(t.strings().size());
  for (NameId id = 0; id < comm_name.size(); ++id) comm_name[id] = is_comm(t.strings().resolve(id));

  struct Acc {
    Timestamp first = 0;
    Timestamp last = 0;
    bool seen = false;
    std::vector<IntervalSet::Interval> comm;
    std::vector<IntervalSet::Interval> comp;
  };
  std::map<ProcessId, Acc> per;
  for (std::size_t i = 0; i < t.size(); ++i) {
    auto& acc = per[t.process(i)];
    const auto ts = t.timestamp(i);
    if (!acc.seen) {
      acc.first = acc.last = ts;
      acc.seen = true;
    }
    acc.first = std::min(acc.first, ts);
    acc.last = std::max(acc.last, ts);
    if (t.kind(i) != EventKind::Enter || matching[i] == kNoRow) continue;
    if (comm_name[t.name_id(i)]) {
      acc.comm.emplace_back(ts, t.timestamp(static_cast<std::size_t>(matching[i])));
    } else {
      auto ex = exclusive_intervals(t, children, i);
      acc.comp.insert(acc.comp.end(), ex.begin(), ex.end());
    }
  }

  AnalysisTable table;
  table.row_key = "process";
  for (const char* c : {"comp_only", "overlap", "comm_only", "other"}) table.add_column(c, "ns");
  std::int64_t totals[4] = {0, 0, 0, 0};
  for (auto& [rank, acc] : per) {
    const IntervalSet comm(std::move(acc.comm));
    const IntervalSet comp(std::move(acc.comp));
    const std::int64_t span = acc.last - acc.first;
    const std::int64_t values[4] = {comp.subtract(comm).measure(), comm.intersect(comp).measure(),
                                    comm.subtract(comp).measure(), span - comm.unite(comp).measure()};
    std::vector<Cell> row;
    for (int k = 0; k < 4; ++k) {
      row.emplace_back(values[k]);
      totals[k] += values[k];
    }
    table.add_row(std::to_string(rank), std::move(row));
  }
  table.add_row("all", {Cell{totals[0]}, Cell{totals[1]}, Cell{totals[2]}, Cell{totals[3]}});
  return table;
}

}  // namespace tracekit
