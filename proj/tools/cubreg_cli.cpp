#include <unistd.h>

#include <iostream>

#include "cubreg/cli.hpp"

int main(int argc, char** argv) {
  return cubreg::run_cli(argc, argv, std::cout, std::cerr, isatty(STDOUT_FILENO) != 0);
}
