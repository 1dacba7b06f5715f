#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "tracekit/error.hpp"
#include "tracekit/readers.hpp"

namespace tracekit {

Trace merge_traces(std::vector<Trace> parts) {
  Trace merged;
  auto& out = merged.events;
  std::size_t total = 0;
  for (const auto& part : parts) total += part.events.size();
  out.reserve(total);

  std::set<ProcessId> seen;
  std::size_t skipped = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& in = parts[p].events;
    for (auto rank : in.process_ids()) {
      if (!seen.insert(rank).second) {
        throw Error(Errc::DuplicateProcess, "rank " + std::to_string(rank) +
                                                " appears in more than one input (part " +
                                                std::to_string(p) + ")");
      }
    }
    std::vector<NameId> remap(in.strings().size());
    for (NameId id = 0; id < remap.size(); ++id) remap[id] = out.strings().intern(in.strings().resolve(id));
    for (std::size_t i = 0; i < in.size(); ++i) {
      out.append(in.timestamp(i), in.kind(i), remap[in.name_id(i)], in.process(i), in.thread(i),
                 in.attrs(i));
    }
    for (const char* key : {"skipped_rows", "skipped_events", "dropped_flows"}) {
      if (auto it = parts[p].metadata.find(key); it != parts[p].metadata.end()) {
        skipped += std::stoull(it->second);
      }
    }
    for (const auto& [k, v] : parts[p].metadata) {
      if (k.rfind("process_name.", 0) == 0 || k.rfind("thread_name.", 0) == 0 || k == "source_format" ||
          k == "matching") {
        merged.metadata[k] = v;
      }
    }
  }
  out.sort();
  merged.metadata["parts"] = std::to_string(parts.size());
  merged.metadata["skipped_total"] = std::to_string(skipped);
  return merged;
}

Trace read_parallel(const std::vector<std::filesystem::path>& paths, TraceFormat format,
                    unsigned workers, bool strict) {
  if (paths.empty()) throw Error(Errc::InvalidArgument, "no input files");
  if (workers == 0) workers = 1;
  const auto n = paths.size();
  std::vector<Trace> parts(n);
  std::vector<std::exception_ptr> errors(n);

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        parts[i] = read_trace(paths[i], format, strict);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(workers, n);
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::string joined;
  for (const auto& p : paths) joined += (joined.empty() ? "" : ";") + p.string();
  auto merged = merge_traces(std::move(parts));
  merged.metadata["path"] = joined;
  return merged;
}

}  // namespace tracekit
