#include "run_support.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "iris3d/error.hpp"

namespace iris3d::cli {

namespace {

void flatten(const nlohmann::json& j, std::vector<std::string> prefix, std::vector<CLI::ConfigItem>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      auto path = prefix;
      path.push_back(it.key());
      flatten(*it, std::move(path), out);
    }
    return;
  }
  if (prefix.empty()) throw CLI::ConversionError("config file must hold a JSON object");
  CLI::ConfigItem item;
  item.name = prefix.back();
  prefix.pop_back();
  item.parents = std::move(prefix);
  const auto scalar = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
    return v.dump();
  };
  if (j.is_array()) {
    for (const auto& v : j) item.inputs.push_back(scalar(v));
  } else if (j.is_null()) {
    throw CLI::ConversionError("config value for '" + item.name + "' is null");
  } else {
    item.inputs.push_back(scalar(j));
  }
  out.push_back(std::move(item));
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool, bool, std::string) const {
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || !opt->get_configurable() || opt->count() == 0) continue;
    const auto& name = opt->get_lnames().front();
    const auto values = opt->as<std::vector<std::string>>();
    j[name] = values.size() == 1 ? nlohmann::json(values.front()) : nlohmann::json(values);
  }
  return j.dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  nlohmann::json j;
  try {
    input >> j;
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
  }
  std::vector<CLI::ConfigItem> items;
  flatten(j, {}, items);
  return items;
}

namespace {

void fnv1a_update(std::uint64_t& h, std::istream& is) {
  char buf[1 << 14];
  while (is.read(buf, sizeof buf) || is.gcount() > 0) {
    for (std::streamsize i = 0; i < is.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
  }
}

}  // namespace

std::uint64_t fnv1a_path(const std::filesystem::path& path) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& e : std::filesystem::recursive_directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  for (const auto& f : files) {
    std::ifstream is(f, std::ios::binary);
    if (!is) throw IoError("cannot open " + f.string());
    fnv1a_update(h, is);
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

void require_exists(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("missing input: " + path.string());
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  nlohmann::json j;
  j["command"] = m.command;
  j["version"] = version_string();
  j["seed"] = m.seed;
  j["arguments"] = m.arguments;
  auto& inputs = j["inputs"] = nlohmann::json::array();
  for (const auto& p : m.inputs) inputs.push_back({{"path", p.string()}, {"fnv1a64", hex64(fnv1a_path(p))}});
  auto& outputs = j["outputs"] = nlohmann::json::array();
  for (const auto& p : m.outputs) outputs.push_back(p.string());
  if (!m.extra.empty()) j["details"] = m.extra;
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("manifest: write failed");
}

std::filesystem::path manifest_path_for(const std::filesystem::path& artifact) {
  if (std::filesystem::is_directory(artifact)) return artifact / "manifest.json";
  auto p = artifact;
  p += ".manifest.json";
  return p;
}

std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir, const std::string& prefix,
                                              const std::string& suffix) {
  require_exists(dir);
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.size() >= prefix.size() + suffix.size() && name.starts_with(prefix) && name.ends_with(suffix))
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string version_string() { return std::string("iris3d ") + IRIS3D_VERSION; }

}  // namespace iris3d::cli
