#include <iostream>
#include <string>
#include <vector>

#include "dyadlab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dyadlab::cli::run(args, std::cout, std::cerr);
}
