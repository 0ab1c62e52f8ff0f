// knotdet: single multiplexed binary for the knot-inspection toolkit.
// Subcommands: align, dataset (crop | split | import-via), iou, eval, fit,
// render. Exit codes: 0 success, 1 usage error, 2 I/O error,
// 3 numerical/divergence error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "knotdet/align.hpp"
#include "knotdet/dataset.hpp"
#include "knotdet/ellipse.hpp"
#include "knotdet/fit.hpp"
#include "knotdet/iou.hpp"
#include "knotdet/metrics.hpp"
#include "knotdet/png_io.hpp"
#include "knotdet/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

knotdet::Ellipse parse_ellipse_arg(const std::string& text) {
  std::istringstream in(text);
  double v[5];
  char sep = ',';
  for (int i = 0; i < 5; ++i) {
    if (i > 0 && !(in >> sep && sep == ',')) {
      throw knotdet::InvalidInputError(
          "expected cx,cy,rx,ry,theta but got '" + text + "'");
    }
    if (!(in >> v[i])) {
      throw knotdet::InvalidInputError(
          "expected cx,cy,rx,ry,theta but got '" + text + "'");
    }
  }
  knotdet::Ellipse e{v[0], v[1], v[2], v[3], knotdet::normalize_theta(v[4])};
  knotdet::validate(e);
  return e;
}

json ellipse_to_json(const knotdet::Ellipse& e) {
  return json{{"cx", e.cx}, {"cy", e.cy}, {"rx", e.rx},
              {"ry", e.ry}, {"theta", e.theta}};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.good()) {
    throw knotdet::IoError("cannot open " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw knotdet::IoError(path + ": " + e.what());
  }
}

// --- align -------------------------------------------------------------

struct AlignArgs {
  std::string input;
  std::string output;
  knotdet::AlignConfig cfg;
  std::string method = "eq1";
  int threshold = 40;
  std::string emit_shifts;
};

void run_align(const AlignArgs& args) {
  const knotdet::RgbImage rgb = knotdet::read_png_rgb(args.input);
  const knotdet::GrayImage gray = knotdet::to_grayscale(rgb);
  knotdet::ShiftProfile profile;
  if (args.method == "eq1") {
    profile = knotdet::optimal_shifts(gray, args.cfg);
  } else if (args.method == "threshold") {
    profile = knotdet::threshold_align(gray, args.threshold);
  } else {
    throw knotdet::InvalidInputError("unknown align method '" + args.method +
                                     "' (expected eq1 or threshold)");
  }
  const knotdet::Rgb pad{args.cfg.pad_value, args.cfg.pad_value,
                         args.cfg.pad_value};
  knotdet::write_png_rgb(args.output, knotdet::apply_shifts(rgb, profile, pad));
  if (!args.emit_shifts.empty()) {
    knotdet::write_text_file(args.emit_shifts,
                             json{{"shifts", profile.shifts}}.dump(2) + "\n");
  }
  int max_abs = 0;
  for (const int s : profile.shifts) max_abs = std::max(max_abs, std::abs(s));
  std::cout << "aligned " << args.input << " -> " << args.output << " ("
            << gray.width << " columns, max |shift| " << max_abs << " px)\n";
}

// --- dataset crop -------------------------------------------------------

struct CropArgs {
  std::string in_dir;
  std::string out_dir;
  int count_per_image = 10;
  std::uint64_t seed = 0;
  int out_size = 512;
};

knotdet::RgbImage extract_square(const knotdet::RgbImage& img, int x0, int y0,
                                 int side) {
  knotdet::RgbImage out =
      knotdet::RgbImage::filled(side, side, knotdet::Rgb{0, 0, 0});
  for (int y = 0; y < side; ++y) {
    const int sy = y0 + y;
    if (sy < 0 || sy >= img.height) continue;
    for (int x = 0; x < side; ++x) {
      const int sx = x0 + x;
      if (sx < 0 || sx >= img.width) continue;
      out.at(x, y) = img.at(sx, sy);
    }
  }
  return out;
}

std::vector<std::string> annotation_files(const std::string& dir) {
  std::vector<std::string> files;
  if (!fs::is_directory(dir)) {
    throw knotdet::IoError(dir + " is not a directory");
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

void run_crop(const CropArgs& args) {
  fs::create_directories(args.out_dir);
  std::vector<knotdet::AnnotatedImage> crop_annotations;
  int total_crops = 0;

  for (const std::string& file : annotation_files(args.in_dir)) {
    for (const knotdet::AnnotatedImage& img :
         knotdet::load_annotations(file)) {
      knotdet::CropPolicy policy;
      policy.out_size = args.out_size;
      const std::vector<knotdet::CropRecord> crops =
          knotdet::generate_crops(img, args.count_per_image, args.seed,
                                  policy);
      if (crops.empty()) continue;

      const knotdet::RgbImage source = knotdet::read_png_rgb(
          (fs::path(args.in_dir) / img.image_path).string());
      const std::string stem = fs::path(img.image_path).stem().string();
      for (std::size_t i = 0; i < crops.size(); ++i) {
        const knotdet::CropRecord& crop = crops[i];
        const std::string crop_name =
            stem + "_crop" + std::to_string(i) + ".png";
        const knotdet::RgbImage square =
            extract_square(source, crop.x0, crop.y0, crop.side);
        knotdet::write_png_rgb(
            (fs::path(args.out_dir) / crop_name).string(),
            knotdet::resize_bilinear(square, crop.out_size, crop.out_size));

        knotdet::AnnotatedImage record;
        record.image_path = crop_name;
        record.width = crop.out_size;
        record.height = crop.out_size;
        record.board_id = img.board_id;
        record.surface = img.surface;
        record.knots = crop.knots;
        crop_annotations.push_back(std::move(record));
        ++total_crops;
      }
    }
  }

  knotdet::write_text_file(
      (fs::path(args.out_dir) / "crops.json").string(),
      knotdet::to_json(crop_annotations).dump(2) + "\n");
  std::cout << "wrote " << total_crops << " crops to " << args.out_dir
            << "\n";
}

// --- dataset split --------------------------------------------------------

struct SplitArgs {
  std::string input;
  std::string output;
  std::uint64_t seed = 0;
  std::string ratios = "0.7,0.1,0.2";
};

void run_split(const SplitArgs& args) {
  double r[3];
  std::istringstream in(args.ratios);
  char sep = ',';
  if (!(in >> r[0] >> sep >> r[1] >> sep >> r[2])) {
    throw knotdet::InvalidInputError("expected --ratios a,b,c");
  }

  std::vector<std::string> boards;
  const auto add_boards = [&](const std::string& file) {
    for (const knotdet::AnnotatedImage& img : knotdet::load_annotations(file)) {
      if (std::find(boards.begin(), boards.end(), img.board_id) ==
          boards.end()) {
        boards.push_back(img.board_id);
      }
    }
  };
  if (fs::is_directory(args.input)) {
    for (const std::string& file : annotation_files(args.input)) {
      add_boards(file);
    }
  } else {
    add_boards(args.input);
  }

  const knotdet::SplitResult result =
      knotdet::split(boards, args.seed, r[0], r[1], r[2]);
  const json out{{"train", result.train},
                 {"val", result.val},
                 {"test", result.test},
                 {"seed", args.seed}};
  if (args.output.empty()) {
    std::cout << out.dump(2) << "\n";
  } else {
    knotdet::write_text_file(args.output, out.dump(2) + "\n");
    std::cout << "split " << boards.size() << " boards into "
              << result.train.size() << "/" << result.val.size() << "/"
              << result.test.size() << " -> " << args.output << "\n";
  }
}

// --- dataset import-via -----------------------------------------------------

struct ImportViaArgs {
  std::string input;
  std::string images_dir;
  std::string output;
};

void run_import_via(const ImportViaArgs& args) {
  std::vector<knotdet::AnnotatedImage> images =
      knotdet::import_via(load_json_file(args.input), args.input);
  for (knotdet::AnnotatedImage& img : images) {
    if (img.width <= 0 || img.height <= 0) {
      if (args.images_dir.empty()) {
        throw knotdet::IoError(
            args.input + ": " + img.image_path +
            ": no width/height in file_attributes and no --images directory "
            "to read them from");
      }
      const knotdet::RgbImage px = knotdet::read_png_rgb(
          (fs::path(args.images_dir) / img.image_path).string());
      img.width = px.width;
      img.height = px.height;
    }
    knotdet::validate(img);
  }
  knotdet::write_text_file(args.output,
                           knotdet::to_json(images).dump(2) + "\n");
  std::cout << "imported " << images.size() << " images -> " << args.output
            << "\n";
}

// --- iou ---------------------------------------------------------------

struct IouArgs {
  std::string a;
  std::string b;
  int oracle = 0;
};

void run_iou(const IouArgs& args) {
  const knotdet::Ellipse a = parse_ellipse_arg(args.a);
  const knotdet::Ellipse b = parse_ellipse_arg(args.b);
  const knotdet::IoUResult r = knotdet::iou_grid(a, b);
  json out{{"iou", r.iou},
           {"intersection_samples", r.intersection_samples},
           {"union_samples", r.union_samples},
           {"grid_w", r.grid_w},
           {"grid_h", r.grid_h}};
  if (args.oracle > 0) {
    out["oracle"] = knotdet::iou_oracle(a, b, args.oracle);
  }
  std::cout << out.dump(2) << "\n";
}

// --- eval --------------------------------------------------------------

struct EvalArgs {
  std::string predictions;
  std::string ground_truth;
  double min_iou = 0.0;
  std::string output;
};

void run_eval(const EvalArgs& args) {
  const std::vector<knotdet::AnnotatedImage> gt =
      knotdet::load_annotations(args.ground_truth);
  const std::vector<knotdet::AnnotatedImage> preds =
      knotdet::load_annotations(args.predictions);

  std::map<std::string, const knotdet::AnnotatedImage*> pred_by_image;
  std::map<std::string, bool> pred_seen;
  for (const knotdet::AnnotatedImage& p : preds) {
    pred_by_image[p.image_path] = &p;
    pred_seen[p.image_path] = false;
  }

  json images = json::array();
  double matched_sum = 0.0;
  std::size_t matched_count = 0;
  std::size_t penalized_denom = 0;

  const auto eval_pair = [&](const std::string& name,
                             const std::vector<knotdet::KnotAnnotation>& det,
                             const std::vector<knotdet::KnotAnnotation>&
                                 truth) {
    const knotdet::MatchReport report =
        knotdet::match_and_score(det, truth, args.min_iou);
    for (const knotdet::MatchPair& p : report.pairs) matched_sum += p.iou;
    matched_count += report.pairs.size();
    penalized_denom += std::max(det.size(), truth.size());
    json entry = knotdet::to_json(report);
    entry["image"] = name;
    images.push_back(std::move(entry));
  };

  for (const knotdet::AnnotatedImage& g : gt) {
    const auto it = pred_by_image.find(g.image_path);
    if (it == pred_by_image.end()) {
      eval_pair(g.image_path, {}, g.knots);
    } else {
      eval_pair(g.image_path, it->second->knots, g.knots);
      pred_seen[g.image_path] = true;
    }
  }
  for (const knotdet::AnnotatedImage& p : preds) {
    if (!pred_seen[p.image_path]) {
      std::cerr << "warning: predictions for " << p.image_path
                << " have no ground-truth image\n";
      eval_pair(p.image_path, p.knots, {});
    }
  }

  // Dataset-level means pooled over all images.
  const json report{
      {"images", std::move(images)},
      {"mean_iou_matched",
       matched_count == 0 ? 0.0 : matched_sum / matched_count},
      {"mean_iou_penalized",
       penalized_denom == 0 ? 0.0 : matched_sum / penalized_denom}};
  std::cout << report.dump(2) << "\n";
  if (!args.output.empty()) {
    knotdet::write_text_file(args.output, report.dump(2) + "\n");
  }
}

// --- fit ---------------------------------------------------------------

struct FitArgs {
  std::string target;
  std::string init;
  std::string metric = "w2";
  double step_size = 0.25;
  int max_iters = 5000;
  double grad_tolerance = 1e-6;
  std::string trace_path;
};

void run_fit(const FitArgs& args) {
  knotdet::FitConfig cfg;
  if (args.metric == "w2") {
    cfg.metric = knotdet::FitMetric::W2Squared;
  } else if (args.metric == "kl") {
    cfg.metric = knotdet::FitMetric::KL;
  } else if (args.metric == "l2") {
    cfg.metric = knotdet::FitMetric::L2Params;
  } else {
    throw knotdet::InvalidInputError("unknown metric '" + args.metric +
                                     "' (expected w2, kl, or l2)");
  }
  cfg.step_size = args.step_size;
  cfg.max_iters = args.max_iters;
  cfg.grad_tolerance = args.grad_tolerance;

  const knotdet::FitTrace trace = knotdet::fit_ellipse(
      parse_ellipse_arg(args.init), parse_ellipse_arg(args.target), cfg);

  json out{{"iterations", trace.iterations},
           {"final", ellipse_to_json(trace.final_params)},
           {"final_loss", trace.final_loss}};
  std::cout << out.dump(2) << "\n";
  if (!args.trace_path.empty()) {
    out["loss_history"] = trace.loss_history;
    knotdet::write_text_file(args.trace_path, out.dump(2) + "\n");
  }
}

// --- render -------------------------------------------------------------

struct RenderArgs {
  std::string image;
  std::string output;
  std::string ground_truth;
  std::string detections;
  std::string baseline;
  int stroke = 2;
};

std::vector<knotdet::Ellipse> knots_for_image(const std::string& file,
                                              const std::string& image) {
  const std::vector<knotdet::AnnotatedImage> all =
      knotdet::load_annotations(file);
  if (all.size() == 1) return all.front().knots;
  const std::string name = fs::path(image).filename().string();
  for (const knotdet::AnnotatedImage& img : all) {
    if (fs::path(img.image_path).filename().string() == name) {
      return img.knots;
    }
  }
  throw knotdet::IoError(file + ": no entry for image " + name);
}

void run_render(const RenderArgs& args) {
  knotdet::OverlaySpec spec;
  spec.image_path = args.image;
  spec.stroke_width = args.stroke;
  // Color convention: green ground truth, red method output, blue baseline.
  if (!args.ground_truth.empty()) {
    spec.groups.push_back({"ground-truth", knotdet::Rgb{0, 255, 0},
                           knots_for_image(args.ground_truth, args.image)});
  }
  if (!args.detections.empty()) {
    spec.groups.push_back({"detections", knotdet::Rgb{255, 0, 0},
                           knots_for_image(args.detections, args.image)});
  }
  if (!args.baseline.empty()) {
    spec.groups.push_back({"baseline", knotdet::Rgb{0, 0, 255},
                           knots_for_image(args.baseline, args.image)});
  }
  knotdet::write_png_rgb(args.output, knotdet::render_overlay(spec));
  std::cout << "rendered " << spec.groups.size() << " groups -> "
            << args.output << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-parameterized ellipse toolkit for knot inspection"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for randomized operations")
      ->capture_default_str();

  AlignArgs align_args;
  CLI::App* align = app.add_subcommand(
      "align", "Correct per-column scan misalignment in a board image");
  align->fallthrough();
  align->add_option("--input", align_args.input, "Input PNG")->required();
  align->add_option("--output", align_args.output, "Aligned output PNG")
      ->required();
  align->add_option("--n", align_args.cfg.n,
                    "Number of previous columns compared against")
      ->capture_default_str();
  align->add_option("--p", align_args.cfg.p, "Distance-weight exponent")
      ->capture_default_str();
  align->add_option("--k", align_args.cfg.k, "Column norm order (1 or 2)")
      ->capture_default_str();
  align->add_option("--max-shift", align_args.cfg.max_shift,
                    "Largest candidate shift in pixels")
      ->capture_default_str();
  align->add_option("--method", align_args.method,
                    "eq1 (weighted column norms) or threshold (baseline)")
      ->capture_default_str();
  align->add_option("--threshold", align_args.threshold,
                    "Intensity threshold for --method threshold")
      ->capture_default_str();
  align->add_option("--emit-shifts", align_args.emit_shifts,
                    "Write the shift profile JSON here");
  align->callback([&] { run_align(align_args); });

  CLI::App* dataset =
      app.add_subcommand("dataset", "Annotation dataset tooling");
  dataset->require_subcommand(1);
  dataset->fallthrough();

  CropArgs crop_args;
  CLI::App* crop = dataset->add_subcommand(
      "crop", "Generate square knot crops with re-parameterized annotations");
  crop->fallthrough();
  crop->add_option("--in", crop_args.in_dir,
                   "Directory with annotation JSONs and images")
      ->required();
  crop->add_option("--out", crop_args.out_dir, "Output directory")->required();
  crop->add_option("--count-per-image", crop_args.count_per_image,
                   "Crops to generate per image")
      ->capture_default_str();
  crop->add_option("--out-size", crop_args.out_size,
                   "Side length of the resized crops")
      ->capture_default_str();
  crop->callback([&] {
    crop_args.seed = seed;
    run_crop(crop_args);
  });

  SplitArgs split_args;
  CLI::App* split = dataset->add_subcommand(
      "split", "Board-level train/val/test split of an annotation set");
  split->fallthrough();
  split->add_option("--in", split_args.input,
                    "Annotation file or directory of annotation JSONs")
      ->required();
  split->add_option("--out", split_args.output,
                    "Output JSON (stdout if omitted)");
  split->add_option("--ratios", split_args.ratios,
                    "train,val,test proportions")
      ->capture_default_str();
  split->callback([&] {
    split_args.seed = seed;
    run_split(split_args);
  });

  ImportViaArgs via_args;
  CLI::App* via = dataset->add_subcommand(
      "import-via", "Convert a VGG Image Annotator export to the schema");
  via->fallthrough();
  via->add_option("--in", via_args.input, "VIA project/export JSON")
      ->required();
  via->add_option("--images", via_args.images_dir,
                  "Directory with the referenced images (for dimensions)");
  via->add_option("--out", via_args.output, "Output annotation JSON")
      ->required();
  via->callback([&] { run_import_via(via_args); });

  IouArgs iou_args;
  CLI::App* iou =
      app.add_subcommand("iou", "Discretized IoU between two ellipses");
  iou->fallthrough();
  iou->add_option("--a", iou_args.a, "First ellipse cx,cy,rx,ry,theta")
      ->required();
  iou->add_option("--b", iou_args.b, "Second ellipse cx,cy,rx,ry,theta")
      ->required();
  iou->add_option("--oracle", iou_args.oracle,
                  "Also report the midpoint oracle at this sampling density");
  iou->callback([&] { run_iou(iou_args); });

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval",
      "Match detections to ground truth and report mean IoU "
      "(means are pooled over all images)");
  eval->fallthrough();
  eval->add_option("--predictions", eval_args.predictions,
                   "Detections in the annotation schema")
      ->required();
  eval->add_option("--ground-truth", eval_args.ground_truth,
                   "Ground-truth annotations")
      ->required();
  eval->add_option("--min-iou", eval_args.min_iou,
                   "Pairs at or below this IoU stay unmatched")
      ->capture_default_str();
  eval->add_option("--out", eval_args.output, "Write the report JSON here");
  eval->callback([&] { run_eval(eval_args); });

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "Gradient-descent fit of an ellipse to a target");
  fit->fallthrough();
  fit->add_option("--target", fit_args.target, "Target cx,cy,rx,ry,theta")
      ->required();
  fit->add_option("--init", fit_args.init, "Initial cx,cy,rx,ry,theta")
      ->required();
  fit->add_option("--metric", fit_args.metric, "w2, kl, or l2")
      ->capture_default_str();
  fit->add_option("--step", fit_args.step_size, "Initial line-search step")
      ->capture_default_str();
  fit->add_option("--max-iters", fit_args.max_iters, "Iteration cap")
      ->capture_default_str();
  fit->add_option("--grad-tol", fit_args.grad_tolerance,
                  "Gradient infinity-norm stopping tolerance")
      ->capture_default_str();
  fit->add_option("--trace", fit_args.trace_path,
                  "Write the full loss history JSON here");
  fit->callback([&] { run_fit(fit_args); });

  RenderArgs render_args;
  CLI::App* render =
      app.add_subcommand("render", "Draw annotation overlays onto an image");
  render->fallthrough();
  render->add_option("--image", render_args.image, "Base PNG")->required();
  render->add_option("--output", render_args.output, "Overlay PNG")
      ->required();
  render->add_option("--ground-truth", render_args.ground_truth,
                     "Ground-truth annotations (drawn green)");
  render->add_option("--detections", render_args.detections,
                     "Detection annotations (drawn red)");
  render->add_option("--baseline", render_args.baseline,
                     "Baseline annotations (drawn blue)");
  render->add_option("--stroke", render_args.stroke, "Stroke width in pixels")
      ->capture_default_str();
  render->callback([&] { run_render(render_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const knotdet::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const knotdet::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const knotdet::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
