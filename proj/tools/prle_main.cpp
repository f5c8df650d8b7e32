#include <string>
#include <vector>

#include "prle/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return prle::cli_dispatch(args);
}
