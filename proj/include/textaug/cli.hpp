#ifndef TEXTAUG_CLI_HPP
#define TEXTAUG_CLI_HPP

#include <string>
#include <vector>

namespace textaug::cli {

// Runs one CLI invocation (args exclude the program name). Exit codes:
// 0 success, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace textaug::cli

#endif  // TEXTAUG_CLI_HPP
