#include <vector>

#include "qsense/cli.hpp"

int main(int argc, char** argv) {
  return qsense::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
