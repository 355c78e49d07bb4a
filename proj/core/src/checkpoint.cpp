#include "iris3d/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "iris3d/error.hpp"

namespace iris3d::nn {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
void put(std::ostream& os, T v) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
bool get(std::istream& is, T& v) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) return false;
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&v, bytes, sizeof(T));
  return true;
}

}  // namespace

void write_checkpoint(std::ostream& os, std::span<const Param* const> params) {
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);
  for (const Param* p : params) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p->value.rank()));
    for (auto e : p->value.shape()) put<std::uint64_t>(os, e);
    for (double v : p->value.values()) put<double>(os, v);
  }
  if (!os) throw IoError("failed writing checkpoint");
}

std::vector<NamedTensor> read_checkpoint(std::istream& is) {
  char magic[sizeof(kCheckpointMagic) - 1];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw IoError("not a parameter checkpoint (bad magic)");
  std::vector<NamedTensor> out;
  for (;;) {
    std::uint32_t len = 0;
    if (!get(is, len)) break;
    if (len > (1u << 16)) throw IoError("checkpoint: implausible name length");
    std::string name(len, '\0');
    std::uint32_t rank = 0;
    if (!is.read(name.data(), len) || !get(is, rank) || rank == 0 || rank > 8)
      throw IoError("checkpoint: truncated record header");
    Shape shape(rank);
    for (auto& e : shape) {
      std::uint64_t v = 0;
      if (!get(is, v)) throw IoError("checkpoint: truncated extents for " + name);
      e = static_cast<std::size_t>(v);
    }
    std::vector<double> data(shape_numel(shape));
    for (auto& v : data)
      if (!get(is, v)) throw IoError("checkpoint: truncated payload for " + name);
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(data))});
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const Param* const> params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(os, params);
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_checkpoint(is);
}

void assign_checkpoint(std::span<Param* const> params, const std::vector<NamedTensor>& loaded) {
  for (Param* p : params) {
    auto it = std::find_if(loaded.begin(), loaded.end(), [&](const NamedTensor& t) { return t.name == p->name; });
    if (it == loaded.end()) throw IoError("checkpoint lacks parameter " + p->name);
    require_shape(it->value, p->value.shape(), p->name.c_str());
    p->value = it->value;
  }
}

}  // namespace iris3d::nn
