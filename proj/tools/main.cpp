#include "nonllrtv/cli.hpp"

#include <iostream>

int main(int argc, char **argv)
{
  return nonllrtv::cli::run(argc, argv, std::cout, std::cerr);
}
