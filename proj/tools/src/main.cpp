#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "iwpost/cli/commands.hpp"

int main(int argc, char** argv) {
  std::optional<std::string> env_seed;
  if (const char* s = std::getenv("IWPOST_SEED")) env_seed = s;
  return iwpost::cli::run(argc, argv, std::cout, std::cerr, env_seed);
}
