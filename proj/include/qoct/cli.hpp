#pragma once

namespace qoct {

// Full command-line entry point. Returns the process exit code:
// 0 success, 1 runtime failure, 2 input/config error.
int run_cli(int argc, const char* const* argv);

}  // namespace qoct
