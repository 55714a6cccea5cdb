#include <iostream>

#include "uuaudit/service/cli.hpp"

int main(int argc, char** argv) {
  return uuaudit::cli::run(argc, argv, std::cout, std::cerr);
}
