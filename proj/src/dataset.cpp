#include "knotdet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>

#include <nlohmann/json.hpp>

namespace knotdet {

namespace {

// Deterministic PRNG (splitmix64) so crop sampling is a fixed function of
// (seed, image id) independent of the standard library's distributions.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound) without modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t range(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }
};

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
  for (const char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t crop_stream_seed(const AnnotatedImage& img,
                               std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  h = fnv1a(img.board_id, h);
  h = fnv1a("/", h);
  h = fnv1a(surface_name(img.surface), h);
  h = fnv1a("/", h);
  h = fnv1a(img.image_path, h);
  return h;
}

const nlohmann::json& require_field(const nlohmann::json& j,
                                    const char* field,
                                    const std::string& source) {
  const auto it = j.find(field);
  if (it == j.end()) {
    throw IoError(source + ": missing field '" + field + "'");
  }
  return *it;
}

double require_number(const nlohmann::json& j, const char* field,
                      const std::string& source) {
  const nlohmann::json& v = require_field(j, field, source);
  if (!v.is_number()) {
    throw IoError(source + ": field '" + field + "' must be a number");
  }
  return v.get<double>();
}

std::string require_string(const nlohmann::json& j, const char* field,
                           const std::string& source) {
  const nlohmann::json& v = require_field(j, field, source);
  if (!v.is_string()) {
    throw IoError(source + ": field '" + field + "' must be a string");
  }
  return v.get<std::string>();
}

nlohmann::json knot_to_json(const KnotAnnotation& k) {
  return nlohmann::json{{"cx", k.cx},
                        {"cy", k.cy},
                        {"rx", k.rx},
                        {"ry", k.ry},
                        {"theta", k.theta}};
}

KnotAnnotation knot_from_json(const nlohmann::json& j,
                              const std::string& source) {
  if (!j.is_object()) {
    throw IoError(source + ": knot entry must be an object");
  }
  KnotAnnotation k;
  k.cx = require_number(j, "cx", source);
  k.cy = require_number(j, "cy", source);
  k.rx = require_number(j, "rx", source);
  k.ry = require_number(j, "ry", source);
  k.theta = require_number(j, "theta", source);
  try {
    validate(k);
  } catch (const InvalidInputError& e) {
    throw IoError(source + ": invalid knot: " + e.what());
  }
  return k;
}

}  // namespace

const char* surface_name(Surface s) {
  switch (s) {
    case Surface::wide1:
      return "wide1";
    case Surface::wide2:
      return "wide2";
    case Surface::narrow1:
      return "narrow1";
    case Surface::narrow2:
      return "narrow2";
  }
  return "wide1";
}

Surface surface_from_name(const std::string& name) {
  if (name == "wide1") return Surface::wide1;
  if (name == "wide2") return Surface::wide2;
  if (name == "narrow1") return Surface::narrow1;
  if (name == "narrow2") return Surface::narrow2;
  throw InvalidInputError("unknown surface '" + name + "'");
}

void validate(const AnnotatedImage& img) {
  if (img.width <= 0 || img.height <= 0) {
    throw InvalidInputError("annotated image dimensions must be positive");
  }
  if (img.board_id.empty()) {
    throw InvalidInputError("annotated image needs a nonempty board_id");
  }
  for (const KnotAnnotation& k : img.knots) {
    validate(k);
    const double slack = k.rx + k.ry;
    if (k.cx < -slack || k.cx > img.width + slack || k.cy < -slack ||
        k.cy > img.height + slack) {
      throw InvalidInputError("knot center too far outside image bounds");
    }
  }
}

KnotAnnotation reparameterize(const KnotAnnotation& knot, double x0, double y0,
                              double side, double out_size) {
  validate(knot);
  if (!(side > 0.0)) {
    throw InvalidInputError("crop side must be positive");
  }
  if (!(out_size > 0.0)) {
    throw InvalidInputError("crop output size must be positive");
  }
  const double s = out_size / side;
  KnotAnnotation out = knot;
  out.cx = (knot.cx - x0) * s;
  out.cy = (knot.cy - y0) * s;
  out.rx = knot.rx * s;
  out.ry = knot.ry * s;
  return out;
}

std::vector<CropRecord> generate_crops(const AnnotatedImage& img, int count,
                                       std::uint64_t seed,
                                       const CropPolicy& policy) {
  validate(img);
  if (count < 0) throw InvalidInputError("crop count must be >= 0");
  if (img.knots.empty()) return {};
  if (std::min(img.width, img.height) < policy.min_side) {
    std::cerr << "warning: " << img.image_path << " is smaller than "
              << policy.min_side << " px, no crops generated\n";
    return {};
  }

  std::vector<AxisBox> knot_boxes;
  knot_boxes.reserve(img.knots.size());
  for (const KnotAnnotation& k : img.knots) {
    knot_boxes.push_back(ellipse_bbox(k));
  }

  // Square side spans [height, min(width, 2*height)] on the usual elongated
  // boards; squares taller than the image anchor at y0 = 0 and protrude.
  const int side_hi = std::min(img.width, 2 * img.height);
  const int side_lo = std::min(img.height, side_hi);

  SplitMix64 rng(crop_stream_seed(img, seed));
  std::vector<CropRecord> crops;
  crops.reserve(count);
  long attempts_left =
      static_cast<long>(policy.max_attempts_per_crop) * std::max(count, 1);
  while (static_cast<int>(crops.size()) < count && attempts_left-- > 0) {
    const int side = static_cast<int>(rng.range(side_lo, side_hi));
    const int x0 = static_cast<int>(rng.range(0, std::max(0, img.width - side)));
    const int y0 =
        static_cast<int>(rng.range(0, std::max(0, img.height - side)));
    const AxisBox square{static_cast<double>(x0), static_cast<double>(y0),
                         static_cast<double>(x0 + side),
                         static_cast<double>(y0 + side)};

    CropRecord crop;
    crop.source_image = img.image_path;
    crop.x0 = x0;
    crop.y0 = y0;
    crop.side = side;
    crop.out_size = policy.out_size;
    for (std::size_t i = 0; i < img.knots.size(); ++i) {
      if (intersects(square, knot_boxes[i])) {
        crop.knots.push_back(reparameterize(img.knots[i], x0, y0, side,
                                            policy.out_size));
      }
    }
    if (!crop.knots.empty()) {
      crops.push_back(std::move(crop));
    }
  }
  if (static_cast<int>(crops.size()) < count) {
    std::cerr << "warning: " << img.image_path << ": only " << crops.size()
              << " of " << count << " requested crops intersect a knot\n";
  }
  return crops;
}

SplitResult split(const std::vector<std::string>& boards, std::uint64_t seed,
                  double r_train, double r_val, double r_test) {
  if (r_train < 0.0 || r_val < 0.0 || r_test < 0.0 ||
      r_train + r_val + r_test <= 0.0) {
    throw InvalidInputError("split ratios must be nonnegative and not all zero");
  }
  SplitResult result;
  if (boards.empty()) return result;

  std::vector<std::string> shuffled = boards;
  SplitMix64 rng(seed ^ 0x5b21e7aa1f0c94d3ULL);
  for (std::size_t i = shuffled.size(); i > 1; --i) {
    std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
  }

  const double total = r_train + r_val + r_test;
  const double ratios[3] = {r_train / total, r_val / total, r_test / total};
  const std::size_t n = shuffled.size();
  std::size_t counts[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainders[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  // Largest remainder gets the leftovers; ties resolve train > val > test.
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainders[i] > remainders[best]) best = i;
    }
    counts[best] += 1;
    remainders[best] = -1.0;
    assigned += 1;
  }

  auto it = shuffled.begin();
  result.train.assign(it, it + counts[0]);
  it += counts[0];
  result.val.assign(it, it + counts[1]);
  it += counts[1];
  result.test.assign(it, it + counts[2]);

  if (result.val.empty() || result.test.empty()) {
    std::cerr << "warning: split of " << n
              << " boards leaves an empty part (need >= 10 boards for all "
                 "three to be nonempty)\n";
  }
  return result;
}

nlohmann::json to_json(const AnnotatedImage& img) {
  nlohmann::json knots = nlohmann::json::array();
  for (const KnotAnnotation& k : img.knots) knots.push_back(knot_to_json(k));
  return nlohmann::json{{"image", img.image_path}, {"width", img.width},
                        {"height", img.height},   {"board_id", img.board_id},
                        {"surface", surface_name(img.surface)},
                        {"knots", std::move(knots)}};
}

nlohmann::json to_json(const std::vector<AnnotatedImage>& images) {
  nlohmann::json arr = nlohmann::json::array();
  for (const AnnotatedImage& img : images) arr.push_back(to_json(img));
  return nlohmann::json{{"images", std::move(arr)}};
}

AnnotatedImage annotated_image_from_json(const nlohmann::json& j,
                                         const std::string& source) {
  if (!j.is_object()) {
    throw IoError(source + ": image entry must be an object");
  }
  AnnotatedImage img;
  img.image_path = require_string(j, "image", source);
  img.width = static_cast<int>(require_number(j, "width", source));
  img.height = static_cast<int>(require_number(j, "height", source));
  img.board_id = require_string(j, "board_id", source);
  try {
    img.surface = surface_from_name(require_string(j, "surface", source));
  } catch (const InvalidInputError& e) {
    throw IoError(source + ": field 'surface': " + e.what());
  }
  const nlohmann::json& knots = require_field(j, "knots", source);
  if (!knots.is_array()) {
    throw IoError(source + ": field 'knots' must be an array");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    img.knots.push_back(knot_from_json(
        knots[i], source + ": knots[" + std::to_string(i) + "]"));
  }
  try {
    validate(img);
  } catch (const InvalidInputError& e) {
    throw IoError(source + ": " + e.what());
  }
  return img;
}

std::vector<AnnotatedImage> annotations_from_json(const nlohmann::json& j,
                                                  const std::string& source) {
  std::vector<AnnotatedImage> images;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      images.push_back(annotated_image_from_json(
          j[i], source + "[" + std::to_string(i) + "]"));
    }
  } else if (j.is_object() && j.contains("images")) {
    const nlohmann::json& arr = j["images"];
    if (!arr.is_array()) {
      throw IoError(source + ": field 'images' must be an array");
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
      images.push_back(annotated_image_from_json(
          arr[i], source + ": images[" + std::to_string(i) + "]"));
    }
  } else {
    images.push_back(annotated_image_from_json(j, source));
  }
  return images;
}

std::vector<AnnotatedImage> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) {
    throw IoError("cannot open annotation file " + path);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  return annotations_from_json(j, path);
}

std::vector<AnnotatedImage> import_via(const nlohmann::json& via,
                                       const std::string& source) {
  const nlohmann::json* metadata = &via;
  if (via.is_object() && via.contains("_via_img_metadata")) {
    metadata = &via["_via_img_metadata"];
  }
  if (!metadata->is_object()) {
    throw IoError(source + ": expected a VIA project or export object");
  }

  std::vector<AnnotatedImage> images;
  for (const auto& [key, entry] : metadata->items()) {
    if (!entry.is_object() || !entry.contains("filename") ||
        !entry.contains("regions")) {
      continue;  // settings blocks and other non-image keys
    }
    AnnotatedImage img;
    img.image_path = require_string(entry, "filename", source);
    const std::string ctx = source + ": " + img.image_path;

    const nlohmann::json attrs = entry.value("file_attributes", nlohmann::json::object());
    img.width = static_cast<int>(attrs.value("width", 0.0));
    img.height = static_cast<int>(attrs.value("height", 0.0));
    img.board_id = attrs.value("board_id", std::string{});
    if (img.board_id.empty()) {
      // Fall back to the filename stem.
      const std::string& f = img.image_path;
      const std::size_t slash = f.find_last_of('/');
      const std::size_t start = slash == std::string::npos ? 0 : slash + 1;
      const std::size_t dot = f.find_last_of('.');
      img.board_id = f.substr(start, dot == std::string::npos || dot < start
                                         ? std::string::npos
                                         : dot - start);
    }
    if (attrs.contains("surface")) {
      try {
        img.surface = surface_from_name(attrs["surface"].get<std::string>());
      } catch (const InvalidInputError& e) {
        throw IoError(ctx + ": file_attributes.surface: " + e.what());
      }
    }

    const nlohmann::json& regions = entry["regions"];
    if (!regions.is_array()) {
      throw IoError(ctx + ": 'regions' must be an array");
    }
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const std::string rctx = ctx + ": regions[" + std::to_string(i) + "]";
      const nlohmann::json& shape =
          require_field(regions[i], "shape_attributes", rctx);
      const std::string name = require_string(shape, "name", rctx);
      KnotAnnotation k;
      if (name == "ellipse") {
        k.cx = require_number(shape, "cx", rctx);
        k.cy = require_number(shape, "cy", rctx);
        k.rx = require_number(shape, "rx", rctx);
        k.ry = require_number(shape, "ry", rctx);
        k.theta = normalize_theta(shape.value("theta", 0.0));
      } else if (name == "circle") {
        k.cx = require_number(shape, "cx", rctx);
        k.cy = require_number(shape, "cy", rctx);
        k.rx = k.ry = require_number(shape, "r", rctx);
        k.theta = 0.0;
      } else {
        continue;  // rects, polygons etc. are not knot annotations
      }
      try {
        validate(k);
      } catch (const InvalidInputError& e) {
        throw IoError(rctx + ": " + e.what());
      }
      img.knots.push_back(k);
    }
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace knotdet
