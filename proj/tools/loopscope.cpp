#include <iostream>
#include <string>
#include <vector>

#include "loopscope/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return loopscope::cli::main_entry(args, std::cout, std::cerr);
}
