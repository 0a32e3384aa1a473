#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wagi::cli {

enum ExitCode { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

/// Runs one command line (args excludes the program name). Normal output goes
/// to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wagi::cli
