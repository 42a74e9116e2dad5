#include <string>
#include <vector>

#include "mdopt/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mdopt::cli_dispatch(args);
}
