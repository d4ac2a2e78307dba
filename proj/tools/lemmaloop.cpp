#include <iostream>

#include "lemmaloop/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lemmaloop::run_cli(args, std::cout, std::cerr);
}
