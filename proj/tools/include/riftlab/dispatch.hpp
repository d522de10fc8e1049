#pragma once

#include <string>
#include <vector>

namespace rift::cli {

/// Parses and executes one riftlab invocation.
/// Exit codes: 0 success, 1 validation/config error (nothing written),
/// 2 runtime or numeric error.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

}  // namespace rift::cli
