#include <iostream>
#include <string>
#include <vector>

#include "reqtocode/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return reqtocode::run_cli(args, std::cout, std::cerr);
}
