#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "iris3d/tensor.hpp"

namespace iris3d::nn {

// Binary parameter file:
//   "IR3DNN1\n"
//   per parameter, until EOF:
//     u32 name length, name bytes, u32 rank, u64 extents[rank],
//     f64 payload[numel]
// All integers and floats little-endian.
inline constexpr char kCheckpointMagic[] = "IR3DNN1\n";

struct NamedTensor {
  std::string name;
  Tensor value;
};

void write_checkpoint(std::ostream& os, std::span<const Param* const> params);
std::vector<NamedTensor> read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, std::span<const Param* const> params);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

// Copies loaded values into params by name. Missing names or shape
// differences throw.
void assign_checkpoint(std::span<Param* const> params, const std::vector<NamedTensor>& loaded);

}  // namespace iris3d::nn
