#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace idkit::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitBackend = 3;

// Runs one invocation of the idkit tool; argv[0] is the program name.
// Reports go to `out`; errors are written to `err` as one JSON object
// {"error": {"type", "message"}} per line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace idkit::cli
