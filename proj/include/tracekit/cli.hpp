#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace tracekit {

/// One CLI subcommand and the library analysis it runs.
struct Subcommand {
  std::string_view name;
  std::string_view analysis;
  std::string_view summary;
};

const std::vector<Subcommand>& subcommands();

/// Every user-facing library analysis; each must back exactly one
/// subcommand.
const std::vector<std::string_view>& library_analyses();

/// Runs one invocation. Exit codes: 0 success, 1 analysis or I/O error,
/// 2 usage error (the subcommand help goes to `err`).
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace tracekit
