#include "knotdet/render.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "knotdet/png_io.hpp"
#include "test_support.hpp"

using namespace knotdet;
using namespace knotdet::testing;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    dir_ = fs::temp_directory_path() /
           ("knotdet_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir_);
  }
  ~TempDir() { fs::remove_all(dir_); }
  std::string path(const std::string& name) const {
    return (dir_ / name).string();
  }

 private:
  fs::path dir_;
};

RgbImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  RgbImage img = RgbImage::filled(w, h, Rgb{});
  for (auto& px : img.data) {
    px = Rgb{static_cast<std::uint8_t>(uniform_int(rng, 0, 255)),
             static_cast<std::uint8_t>(uniform_int(rng, 0, 255)),
             static_cast<std::uint8_t>(uniform_int(rng, 0, 255))};
  }
  return img;
}

double distance_to_boundary(const Ellipse& e, double px, double py) {
  const double c = std::cos(e.theta);
  const double s = std::sin(e.theta);
  double best = 1e300;
  for (int i = 0; i < 4096; ++i) {
    const double t = 2.0 * kPi * i / 4096;
    const double ex = e.rx * std::cos(t);
    const double ey = e.ry * std::sin(t);
    const double bx = e.cx + c * ex - s * ey;
    const double by = e.cy + s * ex + c * ey;
    best = std::min(best, std::hypot(px - bx, py - by));
  }
  return best;
}

}  // namespace

TEST(PngIo, RoundTripsRgb) {
  TempDir tmp;
  const RgbImage img = random_image(37, 23, 71);
  write_png_rgb(tmp.path("x.png"), img);
  const RgbImage back = read_png_rgb(tmp.path("x.png"));
  EXPECT_EQ(back, img);
  EXPECT_FALSE(fs::exists(tmp.path("x.png.tmp")));  // temp was renamed away
}

TEST(PngIo, GrayWriteReadsBackAsEqualChannels) {
  TempDir tmp;
  GrayImage gray = GrayImage::filled(16, 9, 0);
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    gray.data[i] = static_cast<std::uint8_t>(i * 7 % 256);
  }
  write_png_gray(tmp.path("g.png"), gray);
  const RgbImage back = read_png_rgb(tmp.path("g.png"));
  ASSERT_EQ(back.width, 16);
  ASSERT_EQ(back.height, 9);
  for (std::size_t i = 0; i < gray.data.size(); ++i) {
    EXPECT_EQ(back.data[i].r, gray.data[i]);
    EXPECT_EQ(back.data[i].g, gray.data[i]);
    EXPECT_EQ(back.data[i].b, gray.data[i]);
  }
}

TEST(PngIo, MissingFileNamesPath) {
  try {
    read_png_rgb("/nonexistent/missing.png");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("missing.png"), std::string::npos);
  }
}

TEST(PngIo, UnwritableTargetThrows) {
  const RgbImage img = random_image(4, 4, 72);
  EXPECT_THROW(write_png_rgb("/nonexistent_dir/out.png", img), IoError);
}

TEST(ResizeBilinear, ConstantImageStaysConstant) {
  const RgbImage img = RgbImage::filled(64, 32, Rgb{10, 130, 200});
  const RgbImage out = resize_bilinear(img, 512, 512);
  EXPECT_EQ(out.width, 512);
  EXPECT_EQ(out.height, 512);
  for (const Rgb& px : out.data) {
    EXPECT_EQ(px, (Rgb{10, 130, 200}));
  }
}

TEST(DrawEllipses, EmptyListLeavesImageUntouched) {
  RgbImage img = random_image(50, 40, 73);
  const RgbImage before = img;
  draw_ellipses(img, {}, Rgb{0, 255, 0}, 2);
  EXPECT_EQ(img, before);
}

TEST(DrawEllipses, StrokesOnlyNearTheBoundary) {
  RgbImage img = RgbImage::filled(120, 100, Rgb{0, 0, 0});
  const Ellipse e{60, 50, 30, 18, 0.5};
  const int stroke = 2;
  draw_ellipses(img, {e}, Rgb{0, 255, 0}, stroke);

  int changed = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.at(x, y) == Rgb{0, 0, 0}) continue;
      ++changed;
      EXPECT_EQ(img.at(x, y), (Rgb{0, 255, 0}));
      EXPECT_LE(distance_to_boundary(e, x, y), stroke / 2.0 + 0.01)
          << "pixel (" << x << "," << y << ") too far from the contour";
    }
  }
  EXPECT_GT(changed, 0);
}

TEST(DrawEllipses, CenterOutsideFrameDrawsPartialArc) {
  RgbImage img = RgbImage::filled(80, 60, Rgb{0, 0, 0});
  const Ellipse e{-10, 30, 25, 15, 0.2};  // center left of the frame
  EXPECT_NO_THROW(draw_ellipses(img, {e}, Rgb{255, 0, 0}, 1));
  int changed = 0;
  for (const Rgb& px : img.data) changed += (px == Rgb{255, 0, 0}) ? 1 : 0;
  EXPECT_GT(changed, 0);  // the arc inside the frame is drawn
}

TEST(DrawEllipses, FullyOffscreenEllipseIsClippedSilently) {
  RgbImage img = RgbImage::filled(40, 30, Rgb{0, 0, 0});
  const RgbImage before = img;
  draw_ellipses(img, {Ellipse{500, 500, 10, 5, 0}}, Rgb{0, 0, 255}, 2);
  EXPECT_EQ(img, before);
}

TEST(DrawEllipses, RejectsBadStroke) {
  RgbImage img = RgbImage::filled(10, 10, Rgb{});
  EXPECT_THROW(draw_ellipses(img, {Ellipse{5, 5, 2, 1, 0}}, Rgb{}, 0),
               InvalidInputError);
}

TEST(RenderOverlay, EmptyGroupsReturnInputPixels) {
  TempDir tmp;
  const RgbImage img = random_image(33, 21, 74);
  write_png_rgb(tmp.path("base.png"), img);
  OverlaySpec spec;
  spec.image_path = tmp.path("base.png");
  EXPECT_EQ(render_overlay(spec), img);
}

TEST(RenderOverlay, RejectsDuplicateGroupColors) {
  TempDir tmp;
  write_png_rgb(tmp.path("base.png"), random_image(20, 20, 75));
  OverlaySpec spec;
  spec.image_path = tmp.path("base.png");
  spec.groups.push_back({"a", Rgb{0, 255, 0}, {Ellipse{5, 5, 2, 1, 0}}});
  spec.groups.push_back({"b", Rgb{0, 255, 0}, {Ellipse{9, 9, 2, 1, 0}}});
  EXPECT_THROW(render_overlay(spec), InvalidInputError);
}

TEST(RenderOverlay, UnreadableImageNamesPath) {
  OverlaySpec spec;
  spec.image_path = "/nonexistent/base.png";
  try {
    render_overlay(spec);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("base.png"), std::string::npos);
  }
}
