#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "tracekit/trace_model.hpp"

namespace tracekit {

/// Point-to-point messages travel as Instant events with attrs
/// {partner, size, tag}: the sender's partner is the receiver and vice versa.
inline constexpr std::string_view kSendEvent = "MpiSend";
inline constexpr std::string_view kRecvEvent = "MpiRecv";

struct MessageRecord {
  ProcessId sender = 0;
  ProcessId receiver = 0;
  std::int64_t bytes = 0;
  std::int64_t tag = 0;
  Timestamp send_ts = 0;
  std::optional<Timestamp> recv_ts;
  std::size_t send_row = 0;
  std::optional<std::size_t> recv_row;
};

struct MessageMatch {
  /// Pairs, ordered by send row.
  std::vector<MessageRecord> matched;
  /// Sends with no receive; recv fields empty.
  std::vector<MessageRecord> unmatched_sends;
  /// Rows of receives with no send.
  std::vector<std::size_t> unmatched_recvs;
  /// Instants missing a usable `partner`, or self-messages when disallowed.
  std::size_t ignored = 0;

  /// Every send record, matched or not, ordered by send row.
  std::vector<MessageRecord> all_sends() const;
};

struct MessageMatchOptions {
  bool allow_self_messages = false;
};

/// Pairs sends and receives FIFO per (sender, receiver, tag) channel in
/// timestamp order. Unmatched records are data, not errors.
MessageMatch match_messages(const Trace& trace, const MessageMatchOptions& options = {});

enum class CommMeasure { Size, Count };

using CommMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// P x P bytes (or counts) from sender row to receiver column, with
/// P = max rank + 1. Unmatched sends count on the sender side. Throws
/// NoCommData when the trace holds no send records.
CommMatrix comm_matrix_dense(const Trace& trace, CommMeasure measure = CommMeasure::Size);
AnalysisTable comm_matrix(const Trace& trace, CommMeasure measure = CommMeasure::Size);

/// Equal-width integer bins over [min size, max size], last bin closed.
AnalysisTable message_histogram(const Trace& trace, std::size_t bins = 20);

/// Per rank: sent (all sends) and received (matched receives).
AnalysisTable comm_by_process(const Trace& trace, CommMeasure measure = CommMeasure::Size);

/// Message count and volume per time bin, binned by send timestamp or, with
/// `by_receive`, by receive timestamp of matched messages.
AnalysisTable comm_over_time(const Trace& trace, std::size_t bins, bool by_receive = false);

/// Which calls count as communication.
struct CommPredicate {
  std::vector<std::string> prefixes{"MPI_"};
  std::vector<std::string> names{"MpiSend", "MpiRecv"};
  std::vector<std::string> substrings{"nccl"};

  bool operator()(std::string_view name) const;
};

/// Per process (plus an "all" row): non-overlapped computation, overlapped,
/// non-overlapped communication and other time. The four sum to the
/// process span [first event, last event).
AnalysisTable comm_comp_breakdown(Trace& trace, const CommPredicate& is_comm = {});

}  // namespace tracekit
