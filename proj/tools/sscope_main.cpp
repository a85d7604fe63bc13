#include <iostream>

#include "sscope/cli.hpp"

int main(int argc, char** argv) {
  return sscope::run_cli(argc, argv, std::cout, std::cerr);
}
