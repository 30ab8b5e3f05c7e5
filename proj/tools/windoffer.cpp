#include <iostream>
#include <string>
#include <vector>

#include "windoffer/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return windoffer::cli::run(args, std::cout, std::cerr);
}
