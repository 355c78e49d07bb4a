#include "iris3d/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "iris3d/error.hpp"

namespace iris3d {

UpperBoundary extract_upper_boundary(const SegMask& mask, std::optional<double> center_column) {
  UpperBoundary out;
  const double xc = center_column.value_or(static_cast<double>(mask.width) / 2.0);

  std::vector<long> top(mask.width, -1);
  for (std::size_t x = 0; x < mask.width; ++x)
    for (std::size_t row = 0; row < mask.height; ++row)
      if (mask.at(x, row)) {
        top[x] = static_cast<long>(row);
        break;
      }

  long first = -1, last = -1;
  for (std::size_t x = 0; x < mask.width; ++x)
    if (top[x] >= 0) {
      if (first < 0) first = static_cast<long>(x);
      last = static_cast<long>(x);
    }
  if (first < 0) return out;

  // Interior gaps as [begin, end] column ranges.
  struct Gap {
    long begin, end;
  };
  std::vector<Gap> gaps;
  for (long x = first; x <= last; ++x) {
    if (top[static_cast<std::size_t>(x)] >= 0) continue;
    long e = x;
    while (e + 1 <= last && top[static_cast<std::size_t>(e + 1)] < 0) ++e;
    gaps.push_back({x, e});
    x = e;
  }

  double split = xc;  // columns < split go left
  bool split_on_gap = false;
  for (const Gap& g : gaps)
    if (static_cast<double>(g.begin) <= xc && xc <= static_cast<double>(g.end)) {
      split = static_cast<double>(g.begin);
      split_on_gap = true;
    }
  if (!split_on_gap && !gaps.empty()) {
    const auto widest = std::max_element(gaps.begin(), gaps.end(), [](const Gap& a, const Gap& b) {
      return (a.end - a.begin) < (b.end - b.begin);
    });
    split = static_cast<double>(widest->begin);
  }

  for (std::size_t x = 0; x < mask.width; ++x) {
    if (top[x] < 0) continue;
    BoundaryPoint p{static_cast<double>(x), static_cast<double>(top[x])};
    (static_cast<double>(x) < split ? out.left : out.right).push_back(p);
  }
  return out;
}

void write_boundary_csv(std::ostream& os, const SliceBoundarySet& set) {
  os << "slice_index,half,point_index,x,z\n";
  os << std::setprecision(17);
  for (const auto& s : set.slices) {
    auto emit = [&](const Polyline& line, char half) {
      for (std::size_t i = 0; i < line.size(); ++i)
        os << s.slice_index << ',' << half << ',' << i << ',' << line[i].x << ',' << line[i].z << '\n';
    };
    emit(s.left, 'L');
    emit(s.right, 'R');
  }
  if (!os) throw IoError("boundary csv: write failed");
}

void write_boundary_csv(const std::filesystem::path& path, const SliceBoundarySet& set) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_boundary_csv(os, set);
}

SliceBoundarySet read_boundary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("boundary csv: empty input");
  if (line.rfind("slice_index,half,point_index,x,z", 0) != 0) throw IoError("boundary csv: unexpected header");
  std::map<std::size_t, SliceBoundary> slices;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    std::string f[5];
    for (int i = 0; i < 5; ++i)
      if (!std::getline(ls, f[i], ','))
        throw IoError("boundary csv line " + std::to_string(lineno) + ": expected 5 fields");
    try {
      const std::size_t idx = std::stoul(f[0]);
      BoundaryPoint p{std::stod(f[3]), std::stod(f[4])};
      if (!std::isfinite(p.x) || !std::isfinite(p.z)) throw std::invalid_argument("non-finite");
      auto& s = slices[idx];
      s.slice_index = idx;
      if (f[1] == "L")
        s.left.push_back(p);
      else if (f[1] == "R")
        s.right.push_back(p);
      else
        throw std::invalid_argument("half");
    } catch (const std::exception&) {
      throw IoError("boundary csv line " + std::to_string(lineno) + ": malformed row");
    }
  }
  SliceBoundarySet set;
  for (auto& [idx, s] : slices) set.slices.push_back(std::move(s));
  return set;
}

SliceBoundarySet read_boundary_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  return read_boundary_csv(is);
}

}  // namespace iris3d
