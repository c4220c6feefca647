#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "textaug/cli.hpp"

int main(int argc, char** argv) {
  try {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return textaug::cli::run_cli(args);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
}
