#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
  return idkit::cli::run(argc, argv, std::cout, std::cerr);
}
