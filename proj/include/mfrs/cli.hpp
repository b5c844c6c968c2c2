#pragma once

#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "mfrs/clock.hpp"
#include "mfrs/config.hpp"
#include "mfrs/error.hpp"

namespace mfrs {

/// Exit codes: stable, scripts depend on them.
enum ExitCode : int {
    kExitOk = 0,
    kExitDomain = 1,  ///< not found, validation, framing failure
    kExitUsage = 2,   ///< bad flags, bad config
    kExitIo = 3,      ///< I/O, decode, corrupt input files
};

int exit_code_for(ErrorCode code);

/// Everything the command line touches outside its arguments, so tests can
/// run commands in-process.
struct CliEnv {
    std::ostream* out = &std::cout;
    std::ostream* err = &std::cerr;
    std::shared_ptr<const Clock> clock;  ///< SystemClock when null
    EnvLookup getenv = process_env;
    /// `serve` returns once this yields true (polled).
    std::function<bool()> should_stop = [] { return false; };
    /// Called by `serve` with the bound port once listening.
    std::function<void(int)> on_serving;
};

/// Runs one command line (without argv[0]) and returns its exit code.
int run_cli(const std::vector<std::string>& args, CliEnv& env);

}  // namespace mfrs
