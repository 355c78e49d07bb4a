#include "iris3d/sectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

namespace iris3d::sectors {

int assign_sector(double phi) {
  if (!std::isfinite(phi)) throw InvariantError("assign_sector: non-finite azimuth");
  const int s = static_cast<int>(std::floor(wrap_angle(phi) / (2.0 * std::numbers::pi) * kSectorCount));
  return std::clamp(s, 0, kSectorCount - 1);
}

std::vector<std::size_t> farthest_point_subsample(std::span<const Vec3> pts, std::size_t count, std::uint64_t seed) {
  if (count > pts.size()) throw InvariantError("farthest-point subsample: asked for more points than available");
  std::vector<std::size_t> out;
  if (count == 0) return out;
  std::mt19937_64 rng(seed);
  out.push_back(std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng));
  std::vector<double> dist(pts.size(), std::numeric_limits<double>::infinity());
  while (out.size() < count) {
    const Vec3& last = pts[out.back()];
    std::size_t best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      dist[i] = std::min(dist[i], (pts[i] - last).squaredNorm());
      if (dist[i] > dist[best]) best = i;
    }
    out.push_back(best);
  }
  return out;
}

std::vector<std::size_t> random_subsample(std::size_t size, std::size_t count, std::uint64_t seed) {
  if (count > size) throw InvariantError("random subsample: asked for more points than available");
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(count);
  return idx;
}

SectorBuild build_sector_samples(const TriMesh& mesh, const curv::CurvatureField& field, std::span<const int> labels,
                                 const SectorOptions& opt) {
  const auto& cloud = mesh.vertices;
  if (field.size() != cloud.size()) throw InvariantError("sectors: curvature field does not match the mesh");
  if (labels.size() != 1 && labels.size() != static_cast<std::size_t>(kSectorCount))
    throw InvariantError("sectors: expected 1 or 24 labels, got " + std::to_string(labels.size()));
  if (opt.n == 0) throw InvariantError("sectors: N must be positive");

  std::array<std::vector<std::size_t>, kSectorCount> members;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double phi = cloud.has_polar() ? cloud.azimuth[i] : std::atan2(cloud.points[i].y(), cloud.points[i].x());
    members[static_cast<std::size_t>(assign_sector(phi))].push_back(i);
  }

  SectorBuild out;
  for (int s = 0; s < kSectorCount; ++s) {
    const auto& idx = members[static_cast<std::size_t>(s)];
    out.raw_counts[static_cast<std::size_t>(s)] = idx.size();
    if (idx.size() < 3) {
      SectorError err(s, "has " + std::to_string(idx.size()) + " vertices, need at least 3");
      if (!opt.permissive) throw err;
      out.errors.push_back(err);
      continue;
    }
    std::vector<Vec3> pts;
    pts.reserve(idx.size());
    for (auto i : idx) pts.push_back(cloud.points[i]);

    std::vector<std::size_t> pick;
    if (idx.size() >= opt.n) {
      pick = opt.random_subsample ? random_subsample(idx.size(), opt.n, opt.seed)
                                  : farthest_point_subsample(pts, opt.n, opt.seed);
    } else {
      pick.resize(idx.size());
      std::iota(pick.begin(), pick.end(), 0);
      std::mt19937_64 rng(opt.seed);
      std::uniform_int_distribution<std::size_t> draw(0, idx.size() - 1);
      while (pick.size() < opt.n) pick.push_back(draw(rng));
    }

    Vec3 centroid = Vec3::Zero();
    for (auto k : pick) centroid += pts[k];
    centroid /= static_cast<double>(pick.size());
    double scale = 0.0;
    for (auto k : pick) scale = std::max(scale, (pts[k] - centroid).norm());
    if (!(scale > 0.0)) scale = 1.0;

    SectorSample sample;
    sample.sector_id = s;
    sample.label = labels.size() == 1 ? labels[0] : labels[static_cast<std::size_t>(s)];
    sample.volume_id = opt.volume_id;
    sample.seed = opt.seed;
    sample.raw_count = idx.size();
    sample.points.reserve(opt.n * kChannels);
    for (auto k : pick) {
      const Vec3 c = (pts[k] - centroid) / scale;
      const std::size_t v = idx[k];
      for (double value : {c.x(), c.y(), c.z(), field.k1[v], field.k2[v], field.gaussian[v], field.mean[v],
                           field.shape_index[v]})
        sample.points.push_back(value);
    }
    out.samples.push_back(std::move(sample));
  }
  return out;
}

void write_dataset(std::ostream& os, const std::vector<SectorSample>& samples) {
  for (const auto& s : samples) {
    nlohmann::json rec;
    rec["sector_id"] = s.sector_id;
    rec["label"] = s.label < 0 ? nlohmann::json(nullptr) : nlohmann::json(s.label);
    auto& pts = rec["points"] = nlohmann::json::array();
    for (std::size_t r = 0; r < s.rows(); ++r)
      pts.push_back(std::vector<double>(s.points.begin() + static_cast<std::ptrdiff_t>(r * kChannels),
                                        s.points.begin() + static_cast<std::ptrdiff_t>((r + 1) * kChannels)));
    rec["volume"] = s.volume_id;
    rec["seed"] = s.seed;
    os << rec.dump() << '\n';
  }
  if (!os) throw IoError("sector dataset: write failed");
}

void write_dataset(const std::filesystem::path& path, const std::vector<SectorSample>& samples) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(os, samples);
}

std::vector<SectorSample> read_dataset(std::istream& is) {
  std::vector<SectorSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "sector dataset line " + std::to_string(line_no);
    try {
      const auto rec = nlohmann::json::parse(line);
      SectorSample s;
      s.sector_id = rec.at("sector_id").get<int>();
      if (s.sector_id < 0 || s.sector_id >= kSectorCount) throw IoError(where + ": sector_id out of range");
      s.label = rec.at("label").is_null() ? -1 : rec.at("label").get<int>();
      for (const auto& row : rec.at("points")) {
        if (row.size() != kChannels) throw IoError(where + ": point rows must have 8 values");
        for (const auto& v : row) s.points.push_back(v.get<double>());
      }
      if (s.points.empty()) throw IoError(where + ": no points");
      if (rec.contains("volume")) s.volume_id = rec["volume"].get<std::string>();
      if (rec.contains("seed")) s.seed = rec["seed"].get<std::uint64_t>();
      s.raw_count = s.rows();
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<SectorSample> read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_dataset(is);
}

}  // namespace iris3d::sectors
