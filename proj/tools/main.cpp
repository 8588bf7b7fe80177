#include <iostream>

#include "moralstat/cli.hpp"

int main(int argc, char** argv) {
  return moralstat::cli::run(argc, argv, std::cout, std::cerr);
}
