#include <iostream>
#include <string>
#include <vector>

#include "opmi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return opmi::run_cli(args, std::cout, std::cerr);
}
