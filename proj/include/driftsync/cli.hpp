#pragma once

#include <string>
#include <vector>

namespace driftsync {

/**
 * Full command-line front end, in-process so tests can drive it.
 * args excludes the program name. Exit codes: 0 success, 1 verification
 * failure, 2 config/usage error, 3 numeric failure.
 */
int cli_main(const std::vector<std::string>& args);

}  // namespace driftsync
