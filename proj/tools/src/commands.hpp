#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace iris3d::cli {

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::vector<std::string> arguments;
};

// Registers every subcommand on `app`; each runs from its own callback.
void register_commands(CLI::App& app, GlobalOptions& global);

}  // namespace iris3d::cli
