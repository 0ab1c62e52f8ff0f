// Benchmark comparing the OpenMP kernels against their serial references.
// Each case also verifies the two paths produce identical results.
// Usage: bench_kernels [--quick]

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "knotdet/align.hpp"
#include "knotdet/ellipse.hpp"
#include "knotdet/iou.hpp"

using namespace knotdet;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct CaseResult {
  double serial_s = 0.0;
  double parallel_s = 0.0;
  bool identical = false;
};

double time_best_of(const std::function<void()>& fn, int repeats) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const double t0 = now_seconds();
    fn();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

void print_row(const std::string& name, const CaseResult& r) {
  std::cout << std::left << std::setw(34) << name << std::right << std::fixed
            << std::setprecision(2) << std::setw(10) << r.serial_s * 1e3
            << " ms" << std::setw(10) << r.parallel_s * 1e3 << " ms"
            << std::setw(8) << std::setprecision(2)
            << r.serial_s / std::max(r.parallel_s, 1e-12) << "x"
            << (r.identical ? "   match" : "   MISMATCH") << "\n";
}

GrayImage jittered_board(int width, int height, int amplitude,
                         std::uint64_t seed) {
  GrayImage board = GrayImage::filled(width, height, 0);
  for (int y = amplitude + 6; y < height - amplitude - 6; ++y) {
    for (int x = 0; x < width; ++x) board.at(x, y) = 200;
  }
  std::mt19937_64 rng(seed);
  ShiftProfile jitter;
  jitter.shifts.assign(width, 0);
  for (int x = 1; x < width; ++x) {
    jitter.shifts[x] =
        std::uniform_int_distribution<int>(-amplitude, amplitude)(rng);
  }
  return apply_shifts(board, jitter, std::uint8_t{0});
}

}  // namespace

int main(int argc, char** argv) {
  bool quick = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) quick = true;
  }

#ifdef _OPENMP
  std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "OpenMP not enabled; both paths run serially.\n";
#endif
  std::cout << std::left << std::setw(34) << "kernel" << std::right
            << std::setw(13) << "serial" << std::setw(13) << "openmp"
            << std::setw(9) << "speedup" << "\n";

  const int repeats = quick ? 1 : 3;
  bool all_match = true;

  {
    const double r = quick ? 150.0 : 500.0;
    const Ellipse a{0, 0, r, 0.7 * r, 0.4};
    const Ellipse b{0.3 * r, -0.2 * r, 0.9 * r, 0.5 * r, -0.8};
    CaseResult result;
    IoUResult serial_out, parallel_out;
    result.serial_s =
        time_best_of([&] { serial_out = iou_grid_serial(a, b); }, repeats);
    result.parallel_s =
        time_best_of([&] { parallel_out = iou_grid(a, b); }, repeats);
    result.identical =
        serial_out.intersection_samples == parallel_out.intersection_samples &&
        serial_out.union_samples == parallel_out.union_samples;
    all_match = all_match && result.identical;
    print_row("iou_grid (" + std::to_string(int(2 * r)) + " px pair)", result);
  }

  {
    const int n = quick ? 512 : 2048;
    const Ellipse a{0, 0, 60, 35, 0.4};
    const Ellipse b{20, -10, 50, 40, -0.9};
    CaseResult result;
    double serial_out = 0.0, parallel_out = 0.0;
    result.serial_s =
        time_best_of([&] { serial_out = iou_oracle_serial(a, b, n); }, repeats);
    result.parallel_s =
        time_best_of([&] { parallel_out = iou_oracle(a, b, n); }, repeats);
    result.identical = serial_out == parallel_out;
    all_match = all_match && result.identical;
    print_row("iou_oracle (" + std::to_string(n) + "^2 samples)", result);
  }

  {
    const int width = quick ? 48 : 128;
    const int height = quick ? 150 : 450;
    const int amplitude = quick ? 20 : 60;
    const GrayImage board = jittered_board(width, height, amplitude, 99);
    AlignConfig cfg;
    cfg.max_shift = amplitude + 10;
    cfg.n = quick ? 30 : 100;
    CaseResult result;
    ShiftProfile serial_out, parallel_out;
    result.serial_s = time_best_of(
        [&] { serial_out = optimal_shifts_serial(board, cfg); }, repeats);
    result.parallel_s =
        time_best_of([&] { parallel_out = optimal_shifts(board, cfg); },
                     repeats);
    result.identical = serial_out.shifts == parallel_out.shifts;
    all_match = all_match && result.identical;
    print_row("optimal_shifts (" + std::to_string(width) + "x" +
                  std::to_string(height) + ")",
              result);
  }

  if (!all_match) {
    std::cerr << "serial and OpenMP paths disagree\n";
    return 1;
  }
  return 0;
}
