#pragma once

#include <string>
#include <vector>

#include "knotdet/ellipse.hpp"
#include "knotdet/image.hpp"

namespace knotdet {

/// Ellipses drawn in one color. Convention used by the CLI: green for ground
/// truth, red for method output, blue for the baseline.
struct OverlayGroup {
  std::string label;
  Rgb color;
  std::vector<Ellipse> ellipses;
};

struct OverlaySpec {
  std::string image_path;
  std::vector<OverlayGroup> groups;
  int stroke_width = 2;
};

/// Strokes each ellipse outline onto the image by sampling at least 720
/// parametric boundary points. Ellipses partially or fully outside the frame
/// are clipped, never dropped.
void draw_ellipses(RgbImage& img, const std::vector<Ellipse>& ellipses,
                   Rgb color, int stroke_width);

/// Loads spec.image_path and draws every group. Group colors must be distinct
/// and stroke_width >= 1.
RgbImage render_overlay(const OverlaySpec& spec);

}  // namespace knotdet
