#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "knotdet/ellipse.hpp"

namespace knotdet {

/// Ground-truth knot record. Same five parameters and invariants as Ellipse;
/// kept as an alias so annotations convert to geometry for free.
using KnotAnnotation = Ellipse;

enum class Surface { wide1, wide2, narrow1, narrow2 };

const char* surface_name(Surface s);
Surface surface_from_name(const std::string& name);

/// One annotated board image: file reference, dimensions, board identity, and
/// the knot ellipses on it. Knot centers may protrude past the image bounds by
/// up to rx + ry (edge knots are valid targets).
struct AnnotatedImage {
  std::string image_path;
  int width = 0;
  int height = 0;
  std::vector<KnotAnnotation> knots;
  std::string board_id;
  Surface surface = Surface::wide1;
};

/// A square crop of a source image, resized to out_size x out_size, with the
/// knots re-parameterized into crop coordinates. x0/y0/side are in source
/// pixels; when side exceeds the source height the square protrudes below the
/// image and out-of-frame pixels are padded black on materialization.
struct CropRecord {
  std::string source_image;
  int x0 = 0;
  int y0 = 0;
  int side = 0;
  int out_size = 512;
  std::vector<KnotAnnotation> knots;
};

struct CropPolicy {
  int out_size = 512;
  int min_side = 32;       // sources smaller than this yield no crops
  int max_attempts_per_crop = 1000;
};

void validate(const AnnotatedImage& img);

/// Maps a knot into crop coordinates: scale s = out_size/side,
/// cx' = (cx - x0) s, cy' = (cy - y0) s, rx' = rx s, ry' = ry s, theta
/// unchanged (square crops scale isotropically).
KnotAnnotation reparameterize(const KnotAnnotation& knot, double x0, double y0,
                              double side, double out_size);

/// Samples `count` square crops whose square intersects at least one knot's
/// bounding box. Knots fully outside a crop are dropped; partially visible
/// ones are kept with re-parameterized coordinates. Deterministic function of
/// (seed, board_id, surface, image_path). Images with no knots, or smaller
/// than policy.min_side, yield an empty list.
std::vector<CropRecord> generate_crops(const AnnotatedImage& img, int count,
                                       std::uint64_t seed,
                                       const CropPolicy& policy = {});

struct SplitResult {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
};

/// Board-level split with largest-remainder rounding of the ratios
/// (default 70/10/20). Deterministic given seed; all boards are covered and
/// the three parts are disjoint.
SplitResult split(const std::vector<std::string>& boards, std::uint64_t seed,
                  double r_train = 0.7, double r_val = 0.1,
                  double r_test = 0.2);

// --- annotation JSON schema -------------------------------------------------
// One image:    {"image", "width", "height", "board_id", "surface",
//                "knots": [{"cx","cy","rx","ry","theta"}]}
// Aggregated:   {"images": [ <one image>, ... ]}

nlohmann::json to_json(const AnnotatedImage& img);
nlohmann::json to_json(const std::vector<AnnotatedImage>& images);

/// Parses one image document. `source` names the file in error messages.
AnnotatedImage annotated_image_from_json(const nlohmann::json& j,
                                         const std::string& source);

/// Accepts a single image document, an aggregated {"images":[...]} document,
/// or a bare array of image documents.
std::vector<AnnotatedImage> annotations_from_json(const nlohmann::json& j,
                                                  const std::string& source);

/// Reads and parses an annotation file (IoError on unreadable/invalid input).
std::vector<AnnotatedImage> load_annotations(const std::string& path);

/// Converts a VGG Image Annotator project/export document (ellipse and circle
/// regions) into the annotation schema. Image dimensions and board metadata
/// are taken from file_attributes (width/height/board_id/surface) when
/// present; otherwise width/height default to 0 and the caller fills them in.
std::vector<AnnotatedImage> import_via(const nlohmann::json& via,
                                       const std::string& source);

}  // namespace knotdet
