#include <iostream>

#include "kentreg/cli.hpp"

int main(int argc, char** argv) {
  return kentreg::run_cli(argc, argv, std::cout, std::cerr);
}
