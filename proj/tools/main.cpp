#include <string>
#include <vector>

#include "cblab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cblab::run_cli(args);
}
