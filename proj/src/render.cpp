#include "knotdet/render.hpp"

#include <algorithm>
#include <cmath>

#include "knotdet/png_io.hpp"

namespace knotdet {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
constexpr int kMinBoundarySamples = 720;

double perimeter_estimate(const Ellipse& e) {
  // Ramanujan's approximation; only used to pick a sample density.
  const double a = e.rx;
  const double b = e.ry;
  return 3.14159265358979323846 *
         (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
}

void paint_disc(RgbImage& img, double px, double py, double radius,
                Rgb color) {
  const int x_lo = std::max(0, static_cast<int>(std::floor(px - radius)));
  const int x_hi =
      std::min(img.width - 1, static_cast<int>(std::ceil(px + radius)));
  const int y_lo = std::max(0, static_cast<int>(std::floor(py - radius)));
  const int y_hi =
      std::min(img.height - 1, static_cast<int>(std::ceil(py + radius)));
  const double r2 = radius * radius;
  for (int y = y_lo; y <= y_hi; ++y) {
    for (int x = x_lo; x <= x_hi; ++x) {
      const double dx = x - px;
      const double dy = y - py;
      if (dx * dx + dy * dy <= r2) {
        img.at(x, y) = color;
      }
    }
  }
}

}  // namespace

void draw_ellipses(RgbImage& img, const std::vector<Ellipse>& ellipses,
                   Rgb color, int stroke_width) {
  validate(img);
  if (stroke_width < 1) {
    throw InvalidInputError("stroke width must be >= 1");
  }
  for (const Ellipse& e : ellipses) {
    validate(e);
    const int samples = std::max(
        kMinBoundarySamples,
        static_cast<int>(std::ceil(4.0 * perimeter_estimate(e))));
    const double c = std::cos(e.theta);
    const double s = std::sin(e.theta);
    const double radius = 0.5 * stroke_width;
    for (int i = 0; i < samples; ++i) {
      const double t = kTwoPi * i / samples;
      const double ex = e.rx * std::cos(t);
      const double ey = e.ry * std::sin(t);
      // Ellipse frame back to world coordinates (inverse of R(theta)).
      const double px = e.cx + c * ex - s * ey;
      const double py = e.cy + s * ex + c * ey;
      if (px < -radius - 1.0 || px > img.width + radius ||
          py < -radius - 1.0 || py > img.height + radius) {
        continue;  // clipped, not dropped
      }
      paint_disc(img, px, py, radius, color);
    }
  }
}

RgbImage render_overlay(const OverlaySpec& spec) {
  if (spec.stroke_width < 1) {
    throw InvalidInputError("stroke width must be >= 1");
  }
  for (std::size_t i = 0; i < spec.groups.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.groups.size(); ++j) {
      if (spec.groups[i].color == spec.groups[j].color) {
        throw InvalidInputError("overlay group colors must be distinct");
      }
    }
  }
  RgbImage img = read_png_rgb(spec.image_path);
  for (const OverlayGroup& group : spec.groups) {
    draw_ellipses(img, group.ellipses, group.color, spec.stroke_width);
  }
  return img;
}

}  // namespace knotdet
