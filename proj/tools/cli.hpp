#ifndef LUNGLINE_CLI_HPP
#define LUNGLINE_CLI_HPP

#include <string>
#include <vector>

namespace lungline::cli {

// One CLI invocation; args exclude the program name. Returns the process
// exit code: 0 success, 1 domain error (bad data/weights), 2 usage error.
int run(const std::vector<std::string>& args);

}  // namespace lungline::cli

#endif  // LUNGLINE_CLI_HPP
