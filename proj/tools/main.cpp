#include <iostream>

#include "tdw/cli.hpp"

int main(int argc, char** argv) {
  return tdw::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
