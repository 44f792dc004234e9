#include <iostream>

#include "artbank/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return artbank::run(args, std::cout, std::cerr);
}
