#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "iris3d/image_io.hpp"

namespace iris3d {

// Pixel coordinates: x is the image column, z the image row (depth, growing
// posteriorly).
struct BoundaryPoint {
  double x = 0.0;
  double z = 0.0;
};

// Sorted by increasing x. A jump of more than one column is a break in the
// boundary; nothing is interpolated across it.
using Polyline = std::vector<BoundaryPoint>;

struct UpperBoundary {
  Polyline left;
  Polyline right;
};

struct SliceBoundary {
  std::size_t slice_index = 0;
  Polyline left;
  Polyline right;
};

struct SliceBoundarySet {
  std::vector<SliceBoundary> slices;
};

// Topmost iris pixel of every column that intersects the mask. The two halves
// are split at the pupil gap: the run of empty columns containing
// center_column (default width/2), else the widest interior gap, else the
// centre column itself.
UpperBoundary extract_upper_boundary(const SegMask& mask, std::optional<double> center_column = std::nullopt);

// CSV rows `slice_index,half,point_index,x,z` with half in {L,R}.
void write_boundary_csv(std::ostream& os, const SliceBoundarySet& set);
void write_boundary_csv(const std::filesystem::path& path, const SliceBoundarySet& set);
SliceBoundarySet read_boundary_csv(std::istream& is);
SliceBoundarySet read_boundary_csv(const std::filesystem::path& path);

}  // namespace iris3d
