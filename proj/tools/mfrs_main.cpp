#include <atomic>
#include <csignal>
#include <string>
#include <vector>

#include "mfrs/cli.hpp"

namespace {
std::atomic<bool> g_stop{false};
void on_signal(int) { g_stop.store(true); }
}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::signal(SIGPIPE, SIG_IGN);
    std::vector<std::string> args(argv + 1, argv + argc);
    mfrs::CliEnv env;
    env.should_stop = [] { return g_stop.load(); };
    return mfrs::run_cli(args, env);
}
