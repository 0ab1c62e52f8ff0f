#pragma once

#include <cstdint>
#include <vector>

#include "knotdet/image.hpp"

namespace knotdet {

/// Parameters of the column-alignment search. Defaults n=100, p=1, k=2 are the
/// values the source method was tuned with; max_shift bounds the candidate
/// range symmetrically and pad_value fills pixels vacated by a shift.
/// overlap_only_norm switches the column norm to the overlapping valid region
/// instead of the full padded column.
struct AlignConfig {
  int n = 100;
  double p = 1.0;
  int k = 2;
  int max_shift = 200;
  std::uint8_t pad_value = 0;
  bool overlap_only_norm = false;
};

/// Per-column vertical shifts in pixels; positive moves a column down.
/// shifts[0] is always 0 (the first column is the alignment reference).
struct ShiftProfile {
  std::vector<int> shifts;
};

void validate(const AlignConfig& cfg);

/// Luma conversion: round(0.299 r + 0.587 g + 0.114 b), clamped to [0, 255].
GrayImage to_grayscale(const RgbImage& img);

/// Column-by-column alignment. Columns are processed left to right; column i's
/// shift minimizes the distance-weighted sum of k-norms against the already
/// shifted previous n columns, searching s in [-max_shift, max_shift]. Ties
/// break toward the smallest |s|, negative before positive. The outer column
/// loop is sequential by contract; the per-column candidate sweep runs under
/// OpenMP and is bit-identical to optimal_shifts_serial.
ShiftProfile optimal_shifts(const GrayImage& gray, const AlignConfig& cfg);

/// Serial reference for optimal_shifts, kept for testing and benchmarking.
ShiftProfile optimal_shifts_serial(const GrayImage& gray,
                                   const AlignConfig& cfg);

/// Moves each column vertically by shifts[i]; pixels shifted out of frame are
/// discarded and vacated pixels take the pad color. Dimensions are unchanged.
RgbImage apply_shifts(const RgbImage& img, const ShiftProfile& shifts, Rgb pad);
GrayImage apply_shifts(const GrayImage& img, const ShiftProfile& shifts,
                       std::uint8_t pad);

/// Threshold baseline: aligns each column's first above-threshold pixel to the
/// reference column's. Columns with no above-threshold pixel get shift 0; if
/// column 0 has none, the leftmost column that does provides the reference row.
ShiftProfile threshold_align(const GrayImage& gray, int threshold);

}  // namespace knotdet
