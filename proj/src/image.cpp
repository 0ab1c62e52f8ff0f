#include "knotdet/image.hpp"

#include <algorithm>
#include <cmath>

namespace knotdet {

void validate(const GrayImage& img) {
  if (img.width < 0 || img.height < 0 ||
      img.data.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw InvalidInputError("gray image data length does not match dimensions");
  }
}

void validate(const RgbImage& img) {
  if (img.width < 0 || img.height < 0 ||
      img.data.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw InvalidInputError("rgb image data length does not match dimensions");
  }
}

RgbImage resize_bilinear(const RgbImage& img, int out_w, int out_h) {
  validate(img);
  if (out_w <= 0 || out_h <= 0) {
    throw InvalidInputError("resize target must be positive");
  }
  RgbImage out = RgbImage::filled(out_w, out_h, Rgb{});
  const double sx = static_cast<double>(img.width) / out_w;
  const double sy = static_cast<double>(img.height) / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    const int y0 = std::clamp(static_cast<int>(std::floor(src_y)), 0, img.height - 1);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double fy = std::clamp(src_y - y0, 0.0, 1.0);
    for (int x = 0; x < out_w; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      const int x0 = std::clamp(static_cast<int>(std::floor(src_x)), 0, img.width - 1);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double fx = std::clamp(src_x - x0, 0.0, 1.0);

      const auto blend = [&](auto channel) {
        const double top = (1.0 - fx) * channel(img.at(x0, y0)) +
                           fx * channel(img.at(x1, y0));
        const double bot = (1.0 - fx) * channel(img.at(x0, y1)) +
                           fx * channel(img.at(x1, y1));
        const double v = (1.0 - fy) * top + fy * bot;
        return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
      };
      out.at(x, y) = Rgb{blend([](Rgb p) { return double(p.r); }),
                         blend([](Rgb p) { return double(p.g); }),
                         blend([](Rgb p) { return double(p.b); })};
    }
  }
  return out;
}

}  // namespace knotdet
