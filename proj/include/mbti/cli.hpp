#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mbti::cli {

/// Runs the `mbti` command line. Errors are written to `err` as one JSON
/// object {"error": <code>, "message": ...}; the return value is the process
/// exit code (0 ok, 1 runtime error, 2 usage or config error).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace mbti::cli
