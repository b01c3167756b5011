#include <iostream>
#include <string>
#include <vector>

#include "cpc/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cpc::run_cli(args, std::cout, std::cerr);
}
