#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hcfm_cli/config.hpp"

namespace hcfm::cli {

enum ExitCode { kOk = 0, kConfigFailure = 2, kNumericalFailure = 3 };

const std::vector<std::string>& commands();

/// Runs a command and writes its CSV files into `out_dir` (created when
/// missing). Returns the written paths. Throws ConfigError when the command
/// and config disagree.
std::vector<std::string> execute(const std::string& command, const Config& config,
                                 const std::string& out_dir, std::ostream& log);

/// Parses, executes and maps exceptions to exit codes with one diagnostic
/// line on `err`.
int dispatch(const std::string& command, const std::string& config_path,
             const std::optional<std::string>& out_dir, const std::optional<std::uint64_t>& seed,
             std::ostream& log, std::ostream& err);

}  // namespace hcfm::cli
