#include <string>
#include <vector>

#include "deformkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return deformkit::cli::run(args);
}
