#include <iostream>
#include <string>
#include <vector>

#include "edcr_spike/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return edcr_spike::cli::run(args, std::cout, std::cerr);
}
