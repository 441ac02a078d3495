#pragma once

#include <string>
#include <vector>

namespace wag3d {

// The wag3d command-line surface, callable in-process so tests can drive the
// exact binary behavior. Returns a process exit code.
int run_cli(const std::vector<std::string>& args);

} // namespace wag3d
