#include <iostream>

#include "cvf/cli.hpp"

int main(int argc, char** argv) {
  return cvf::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
