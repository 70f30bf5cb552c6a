#include "ccflow/cli.hpp"

int main(int argc, char** argv) {
  return ccflow::cli_run(std::vector<std::string>(argv + 1, argv + argc));
}
