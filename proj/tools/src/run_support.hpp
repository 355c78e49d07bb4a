#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace iris3d::cli {

// Reads a JSON object as a CLI11 config: nested objects name subcommands,
// leaves are option values. Options given on the command line win.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

// 64-bit FNV-1a of a file, or of every regular file below a directory in
// path order.
std::uint64_t fnv1a_path(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

// Throws IoError naming the path when it does not exist.
void require_exists(const std::filesystem::path& path);

struct Manifest {
  std::string command;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> arguments;
  nlohmann::json extra = nlohmann::json::object();
};

// Writes `manifest` as JSON (inputs hashed) to `path`.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);
std::filesystem::path manifest_path_for(const std::filesystem::path& artifact);

// Sorted regular files in `dir` whose name starts with `prefix` and ends in
// `suffix`.
std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir, const std::string& prefix,
                                              const std::string& suffix);

std::string version_string();

}  // namespace iris3d::cli
