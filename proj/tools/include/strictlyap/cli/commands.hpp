#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "strictlyap/cli/config.hpp"
#include "strictlyap/error.hpp"

namespace strictlyap::cli {

enum ExitCode : int { kPass = 0, kValidationFailure = 1, kConfigError = 2 };

/// Maps an error to its exit code: config and parse errors -> 2, anything
/// else -> 1.
int exit_code(const Error& e);

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  /// Alternate rigid-body reference "w1r, w2r, w3r".
  std::optional<std::string> reference;
};

/// Each command prints a report to `out`, writes its CSVs under
/// opts.out_dir and returns the exit code. Errors propagate as Error.
int cmd_pe(ProblemConfig cfg, const RunOptions& opts, std::ostream& out);
int cmd_strictify(ProblemConfig cfg, const RunOptions& opts, std::ostream& out);
int cmd_verify(ProblemConfig cfg, const std::string& check, const RunOptions& opts, std::ostream& out);
int cmd_simulate(ProblemConfig cfg, const RunOptions& opts, std::ostream& out);
int cmd_example(const std::string& name, const RunOptions& opts, std::ostream& out);

/// Built-in config by name; throws config-error for unknown names.
ProblemConfig fixture_config(const std::string& name);

}  // namespace strictlyap::cli
