#pragma once

#include <optional>
#include <string>

#include "chy/io.hpp"

namespace chy::cli {

/// Exit codes: 0 success, 2 numerical-tolerance failure, 3 config error.
constexpr int kExitOk = 0;
constexpr int kExitTolerance = 2;
constexpr int kExitConfig = 3;

struct RunOptions {
    std::string command;
    std::optional<std::string> config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;

    // bifurcate flag overrides
    std::optional<std::string> lambda_text;
    std::optional<std::pair<std::string, std::string>> interval_text;
    std::optional<int> jmax;
};

/// Executes a command end to end, writing the JSON report (and any CSV
/// traces or field files) under out_dir. Returns the exit code; the report
/// is written for tolerance failures too.
int run(const RunOptions& options);

} // namespace chy::cli
