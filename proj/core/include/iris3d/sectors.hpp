#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "iris3d/curvature.hpp"
#include "iris3d/error.hpp"
#include "iris3d/mesh.hpp"

namespace iris3d::sectors {

inline constexpr int kSectorCount = 24;
inline constexpr std::size_t kChannels = 8;  // x, y, z, k1, k2, K, H, E

// Half-open 15-degree bins: floor(wrap(phi) / 2pi * 24).
int assign_sector(double phi);

struct SectorSample {
  int sector_id = 0;
  int label = -1;                // -1 unlabelled, 0 open, 1 closure
  std::vector<double> points;    // row-major N x kChannels
  std::string volume_id;
  std::uint64_t seed = 0;
  std::size_t raw_count = 0;     // vertices of the sector before resampling

  std::size_t rows() const { return points.size() / kChannels; }
  double at(std::size_t row, std::size_t ch) const { return points[row * kChannels + ch]; }
};

struct SectorOptions {
  std::size_t n = 256;
  std::uint64_t seed = 1;
  bool random_subsample = false;  // uniform draws instead of farthest-point
  bool permissive = false;        // collect sector errors instead of throwing
  std::string volume_id;
};

struct SectorBuild {
  std::vector<SectorSample> samples;
  std::vector<SectorError> errors;
  std::array<std::size_t, kSectorCount> raw_counts{};
};

// labels holds one entry per sector (or a single entry applied to all).
// Sectors with fewer than 3 vertices raise SectorError, or are reported in
// `errors` in permissive mode. Sectors with more than N vertices are reduced
// by farthest-point sampling from a seeded start; smaller ones keep every
// vertex and are padded with seeded draws with replacement. Coordinates are
// centred on the sample centroid and scaled to unit maximum norm; curvature
// channels are copied unscaled.
SectorBuild build_sector_samples(const TriMesh& mesh, const curv::CurvatureField& field, std::span<const int> labels,
                                 const SectorOptions& opt = {});

// Index selection used above, exposed for checking: `count` distinct indices
// of `pts` (count <= pts.size()).
std::vector<std::size_t> farthest_point_subsample(std::span<const Vec3> pts, std::size_t count, std::uint64_t seed);
std::vector<std::size_t> random_subsample(std::size_t size, std::size_t count, std::uint64_t seed);

// JSON lines {"sector_id", "label", "points", "volume", "seed"}; label is
// null when unknown.
void write_dataset(std::ostream& os, const std::vector<SectorSample>& samples);
void write_dataset(const std::filesystem::path& path, const std::vector<SectorSample>& samples);
std::vector<SectorSample> read_dataset(std::istream& is);
std::vector<SectorSample> read_dataset(const std::filesystem::path& path);

}  // namespace iris3d::sectors
