#ifndef SPECTRAL_TOOLS_CLI_H_
#define SPECTRAL_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace spectral::cli {

// Runs one command. args excludes the program name. Returns the exit code:
// 0 success, 1 configuration error, 2 data error, 3 numeric error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spectral::cli

#endif  // SPECTRAL_TOOLS_CLI_H_
