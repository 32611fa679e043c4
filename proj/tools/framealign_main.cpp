#include <iostream>

#include "framealign/cli.hpp"

int main(int argc, char* argv[]) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return framealign::run_cli(args, std::cout, std::cerr);
}
