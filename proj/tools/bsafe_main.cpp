#include <iostream>
#include <string>
#include <vector>

#include "bsafe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bsafe::cli::run(args, std::cout, std::cerr);
}
