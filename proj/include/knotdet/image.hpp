#pragma once

#include <cstdint>
#include <vector>

#include "knotdet/errors.hpp"

namespace knotdet {

/// Row-major 8-bit grayscale raster.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  static GrayImage filled(int w, int h, std::uint8_t value) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.data.assign(static_cast<std::size_t>(w) * h, value);
    return img;
  }

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
};

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

/// Row-major 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<Rgb> data;

  static RgbImage filled(int w, int h, Rgb value) {
    RgbImage img;
    img.width = w;
    img.height = h;
    img.data.assign(static_cast<std::size_t>(w) * h, value);
    return img;
  }

  Rgb at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  Rgb& at(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }

  bool operator==(const RgbImage&) const = default;
};

void validate(const GrayImage& img);
void validate(const RgbImage& img);

/// Bilinear resample to (out_w, out_h).
RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h);

}  // namespace knotdet
