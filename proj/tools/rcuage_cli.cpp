#include <iostream>

#include "rcuage/sweep.hpp"

int main(int argc, char** argv) {
  return rcuage::run_cli(argc, argv, std::cout, std::cerr);
}
