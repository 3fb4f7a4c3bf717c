#pragma once

#include <string>
#include <vector>

namespace vantage::cli {

/// Entry point shared by the binary and the tests. `args` is the full argv
/// including the program name. Returns 0 on success, 1 on domain errors
/// (one machine-parseable JSON line on stderr), 2 on usage errors.
int run(const std::vector<std::string>& args);

}  // namespace vantage::cli
