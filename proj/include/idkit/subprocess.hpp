#pragma once

#include <chrono>
#include <string>

namespace idkit {

struct ProcessResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

// Runs `command` through /bin/sh with `input` on stdin. Throws BackendError
// if the process cannot be started or exceeds `timeout` (it is killed).
ProcessResult run_shell(const std::string& command, const std::string& input,
                        std::chrono::milliseconds timeout);

}  // namespace idkit
