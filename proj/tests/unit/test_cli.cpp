#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "iris3d/ply.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    const auto d = fs::temp_directory_path() / ("iris3d_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const auto log = scratch() / "stdout.txt";
  const std::string cmd = std::string("\"") + IRIS3D_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(log);
  std::stringstream ss;
  ss << is.rdbuf();
  r.out = ss.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("version and usage errors") {
  const auto v = run("--version");
  CHECK(v.code == 0);
  CHECK(v.out.find("iris3d") != std::string::npos);
  CHECK(run("").code == 4);
  CHECK(run("metrics --bogus 1").code == 4);
  CHECK(run("sectors --mesh a --curvature b --out c --label 3").code == 4);
}

TEST_CASE("metrics of a mask against itself") {
  const auto dir = scratch() / "vol";
  REQUIRE(run("phantom --out " + q(dir) + " --bow 20 --slices 8").code == 0);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "boundaries.csv"));
  const auto mask = dir / "masks" / "mask_000.pgm";
  REQUIRE(fs::exists(mask));
  const auto r = run("metrics --pred " + q(mask) + " --gt " + q(mask));
  CHECK(r.code == 0);
  CHECK(r.out.find("\"dice\": 1.000000") != std::string::npos);
}

TEST_CASE("missing inputs and invalid domains map to exit codes") {
  CHECK(run("metrics --pred /nonexistent/a.pgm --gt /nonexistent/b.pgm").code == 2);
  CHECK(run("phantom --out " + q(scratch() / "bad") + " --bow 500 --slices 8").code == 3);
}

TEST_CASE("reconstructed mesh passes the invariant checker") {
  const auto dir = scratch() / "recon";
  REQUIRE(run("phantom --out " + q(dir) + " --bow 20 --frill 3 --slices 16").code == 0);
  const auto ply = dir / "refined.ply";
  REQUIRE(run("--seed 3 reconstruct --boundaries " + q(dir / "boundaries.csv") + " --out " + q(ply)).code == 0);
  REQUIRE(fs::exists(dir / "refined.ply.manifest.json"));
  const auto mesh = iris3d::read_ply(ply).mesh;
  REQUIRE(mesh.faces.size() > 100);
  // Default r1 is 6 pixels at unit pixel size.
  CHECK(iris3d::testing::min_pairwise_distance(mesh.vertices.points) >= 6.0);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edges;
  for (const auto& f : mesh.faces)
    for (int e = 0; e < 3; ++e) {
      auto a = f[static_cast<std::size_t>(e)], b = f[static_cast<std::size_t>((e + 1) % 3)];
      CHECK(a != b);
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  int worst = 0;
  for (const auto& [edge, count] : edges) worst = std::max(worst, count);
  CHECK(worst <= 2);
}

TEST_CASE("pipeline reports are byte-identical for a fixed seed") {
  const std::string args = " pipeline --volumes 4 --slices 16 --meridian-samples 16 --epochs 2 --sector-points 32 --out ";
  const auto a = scratch() / "run_a", b = scratch() / "run_b";
  const auto ra = run("--seed 7" + args + q(a));
  REQUIRE(ra.code == 0);
  REQUIRE(run("--seed 7 --jobs 2" + args + q(b)).code == 0);
  CHECK(ra.out.find("\"acc\"") != std::string::npos);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "train.jsonl") == slurp(b / "train.jsonl"));
}

TEST_CASE("config file values are overridden by flags") {
  const auto cfg = scratch() / "cfg.json";
  std::ofstream(cfg) << R"({"phantom": {"bow": 20, "slices": 8}})";
  const auto dir = scratch() / "cfgvol";
  REQUIRE(run("--config " + q(cfg) + " phantom --out " + q(dir) + " --bow 0").code == 0);
  const std::string meta = slurp(dir / "metadata.json");
  CHECK(meta.find("\"open\"") != std::string::npos);
  CHECK(fs::exists(dir / "masks" / "mask_007.pgm"));
  CHECK_FALSE(fs::exists(dir / "masks" / "mask_008.pgm"));
}
