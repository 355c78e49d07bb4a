#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "iris3d/tensor.hpp"

namespace iris3d {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 at the top

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}
  std::uint8_t& at(std::size_t x, std::size_t row) { return pixels[row * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t row) const { return pixels[row * width + x]; }
};

// Binary segmentation, 1 = iris.
struct SegMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> labels;

  SegMask() = default;
  SegMask(std::size_t w, std::size_t h) : width(w), height(h), labels(w * h, 0) {}
  std::uint8_t& at(std::size_t x, std::size_t row) { return labels[row * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t row) const { return labels[row * width + x]; }
  std::size_t count() const;
};

// Binary PGM (P5), maxval <= 255.
GrayImage read_pgm(std::istream& is);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(std::ostream& os, const GrayImage& img);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

SegMask mask_from_image(const GrayImage& img, std::uint8_t threshold = 128);
GrayImage image_from_mask(const SegMask& mask);

// [1,H,W] tensor with intensities scaled to [0,1].
nn::Tensor image_to_tensor(const GrayImage& img);

}  // namespace iris3d
