#include <iostream>
#include <string>
#include <vector>

#include "foctl_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return foctl::run(args, std::cout, std::cerr);
}
