#include <iostream>

#include "sqladder/cli.hpp"

int main(int argc, char** argv) {
  return sqladder::cli::run(argc, argv, std::cout, std::cerr);
}
