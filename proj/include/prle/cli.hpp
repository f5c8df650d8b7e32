#pragma once

#include <string>
#include <vector>

namespace prle {

/// Full command-line surface behind the `prle` binary. args excludes the
/// program name. Returns the process exit code: 0 success, 1 usage error,
/// 2 I/O or format error.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace prle
