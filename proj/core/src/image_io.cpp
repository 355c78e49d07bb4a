#include "iris3d/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "iris3d/error.hpp"

namespace iris3d {

std::size_t SegMask::count() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](std::uint8_t v) { return v != 0; }));
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

std::size_t header_number(std::istream& is, const char* field) {
  const std::string tok = header_token(is);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
    throw IoError(std::string("pgm: bad ") + field + " '" + tok + "'");
  return std::stoul(tok);
}

}  // namespace

GrayImage read_pgm(std::istream& is) {
  if (header_token(is) != "P5") throw IoError("pgm: expected binary P5 magic");
  const std::size_t w = header_number(is, "width");
  const std::size_t h = header_number(is, "height");
  const std::size_t maxval = header_number(is, "maxval");
  if (w == 0 || h == 0) throw IoError("pgm: zero extent");
  if (maxval == 0 || maxval > 255) throw IoError("pgm: only 8-bit maxval is supported");
  GrayImage img(w, h);
  if (!is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(w * h)))
    throw IoError("pgm: truncated pixel data");
  if (maxval != 255)
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::min<std::size_t>(255, p * 255 / maxval));
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_pgm(is);
}

void write_pgm(std::ostream& os, const GrayImage& img) {
  os << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!os) throw IoError("pgm: write failed");
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_pgm(os, img);
}

SegMask mask_from_image(const GrayImage& img, std::uint8_t threshold) {
  SegMask m(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) m.labels[i] = img.pixels[i] >= threshold ? 1 : 0;
  return m;
}

GrayImage image_from_mask(const SegMask& mask) {
  GrayImage img(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.labels.size(); ++i) img.pixels[i] = mask.labels[i] ? 255 : 0;
  return img;
}

nn::Tensor image_to_tensor(const GrayImage& img) {
  std::vector<double> d(img.pixels.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = img.pixels[i] / 255.0;
  return nn::Tensor({1, img.height, img.width}, std::move(d));
}

}  // namespace iris3d
