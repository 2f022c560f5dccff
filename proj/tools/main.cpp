#include <iostream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "segfuse/parallel.hpp"

int main(int argc, char** argv) {
  segfuse::parallel::configure_from_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return segfuse::cli::run(args, std::cout, std::cerr);
}
