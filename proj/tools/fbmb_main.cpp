#include <clocale>
#include <iostream>
#include <string>
#include <vector>

#include "fbmb/cli.hpp"

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  std::vector<std::string> args(argv + 1, argv + argc);
  return fbmb::cli::run(args, std::cout, std::cerr);
}
