#include <iostream>
#include <string>
#include <vector>

#include "schemagate/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return schemagate::run_cli(args, std::cout, std::cerr);
}
