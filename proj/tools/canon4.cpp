#include <iostream>
#include <string>
#include <vector>

#include "canon4/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return canon4::run_cli(args, std::cout, std::cerr);
}
