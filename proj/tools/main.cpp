#include <iostream>

#include "bundleray/cli.hpp"

int main(int argc, char** argv) {
  return bundleray::run_cli(argc, argv, std::cout, std::cerr);
}
