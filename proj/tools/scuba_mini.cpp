#include <iostream>

#include "scuba/cli.hpp"

int main(int argc, char** argv) {
  return scuba::run(argc, argv, std::cout, std::cerr);
}
