#include <string>
#include <vector>

#include "hyperhier/cli.hpp"

int main(int argc, char** argv) {
  return hyperhier::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
