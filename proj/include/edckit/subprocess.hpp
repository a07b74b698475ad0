#pragma once

#include <chrono>
#include <string>
#include <vector>

namespace edckit {

struct RunResult {
    int exit_code = -1;
    bool timed_out = false;
    bool signaled = false;
    std::string out;
    std::string err;
    std::chrono::milliseconds duration{0};

    bool ok() const { return exit_code == 0 && !timed_out && !signaled; }
};

// Splits a command template on whitespace, honoring double quotes, and
// replaces whole-token {in}/{out} placeholders.
std::vector<std::string> split_command(const std::string& command_template,
                                       const std::string& in = "",
                                       const std::string& out = "");

// Runs argv with stdin_data fed in while stdout/stderr are drained (the
// writer and readers are multiplexed, so a chatty child cannot deadlock on a
// full pipe). On timeout the child is killed and timed_out is set.
RunResult run_process(const std::vector<std::string>& argv, const std::string& stdin_data,
                      std::chrono::milliseconds timeout,
                      const std::string& working_dir = "");

// True if name is an absolute/relative path to an executable or is found
// on PATH.
bool executable_exists(const std::string& name);

} // namespace edckit
