#pragma once

#include <ostream>

namespace sspcast::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kNumericFailure = 3,
};

/// Runs one `sspcast` invocation. Reports go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sspcast::cli
