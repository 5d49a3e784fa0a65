#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bundleray {

// Exit codes: 0 success, 1 usage or config error, 2 runtime error.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bundleray
