#include "knotdet/align.hpp"

#include <algorithm>
#include <cmath>

namespace knotdet {

namespace {

// Partial sums of squared/absolute byte differences stay below 2^32 for
// blocks of this size, which keeps the inner accumulator 32-bit and
// vectorizable.
constexpr int kBlock = 32768;

std::uint32_t ssd_block(const std::uint8_t* a, const std::uint8_t* b,
                        int len) {
  std::uint32_t acc = 0;
  for (int i = 0; i < len; ++i) {
    const int d = static_cast<int>(a[i]) - static_cast<int>(b[i]);
    acc += static_cast<std::uint32_t>(d * d);
  }
  return acc;
}

std::uint32_t sad_block(const std::uint8_t* a, const std::uint8_t* b,
                        int len) {
  std::uint32_t acc = 0;
  for (int i = 0; i < len; ++i) {
    acc += static_cast<std::uint32_t>(
        std::abs(static_cast<int>(a[i]) - static_cast<int>(b[i])));
  }
  return acc;
}

std::int64_t diff_range(const std::uint8_t* a, const std::uint8_t* b, int len,
                        int k) {
  std::int64_t total = 0;
  while (len > 0) {
    const int chunk = std::min(len, kBlock);
    total += (k == 2) ? ssd_block(a, b, chunk) : sad_block(a, b, chunk);
    a += chunk;
    b += chunk;
    len -= chunk;
  }
  return total;
}

// State shared across the left-to-right column sweep: already-shifted columns
// plus prefix sums of each column's difference against the pad value, so the
// padded part of a candidate's norm costs O(1).
struct SweepState {
  int height = 0;
  int k = 2;
  std::uint8_t pad = 0;
  bool overlap_only = false;
  std::vector<std::uint8_t> shifted;    // column-major, width * height
  std::vector<std::int64_t> pad_prefix;  // width * (height + 1)

  const std::uint8_t* column(int j) const {
    return shifted.data() + static_cast<std::size_t>(j) * height;
  }
  const std::int64_t* prefix(int j) const {
    return pad_prefix.data() + static_cast<std::size_t>(j) * (height + 1);
  }

  void finalize_column(int j, const std::uint8_t* src, int shift) {
    std::uint8_t* dst =
        shifted.data() + static_cast<std::size_t>(j) * height;
    const int lo = std::max(0, shift);
    const int hi = height + std::min(0, shift);
    for (int r = 0; r < lo; ++r) dst[r] = pad;
    for (int r = lo; r < hi; ++r) dst[r] = src[r - shift];
    for (int r = hi; r < height; ++r) dst[r] = pad;

    std::int64_t* pre =
        pad_prefix.data() + static_cast<std::size_t>(j) * (height + 1);
    pre[0] = 0;
    for (int r = 0; r < height; ++r) {
      const int d = static_cast<int>(pad) - static_cast<int>(dst[r]);
      pre[r + 1] = pre[r] + ((k == 2) ? static_cast<std::int64_t>(d) * d
                                      : std::abs(d));
    }
  }
};

double candidate_cost(const SweepState& state, const std::uint8_t* col_i,
                      int i, int j_lo, int s,
                      const std::vector<double>& weights) {
  const int h = state.height;
  const int lo = std::max(0, s);
  const int hi = h + std::min(0, s);
  double total = 0.0;
  for (int j = j_lo; j < i; ++j) {
    std::int64_t acc = diff_range(col_i + (lo - s), state.column(j) + lo,
                                  hi - lo, state.k);
    if (!state.overlap_only) {
      const std::int64_t* pre = state.prefix(j);
      acc += pre[lo] + (pre[h] - pre[hi]);
    }
    const double norm =
        (state.k == 2) ? std::sqrt(static_cast<double>(acc))
                       : static_cast<double>(acc);
    total += weights[i - j] * norm;
  }
  return total;
}

ShiftProfile compute_shifts(const GrayImage& gray, const AlignConfig& cfg,
                            bool parallel) {
  validate(gray);
  validate(cfg);
  if (gray.width < 2) {
    throw InvalidInputError("optimal_shifts needs at least 2 columns");
  }
  if (gray.height <= 2 * cfg.max_shift) {
    throw InvalidInputError("optimal_shifts needs height > 2 * max_shift");
  }

  const int w = gray.width;
  const int h = gray.height;
  const int span = std::min(cfg.max_shift, h - 1);

  // Column-major copy of the input; column pointers feed the inner loops.
  std::vector<std::uint8_t> source(static_cast<std::size_t>(w) * h);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      source[static_cast<std::size_t>(x) * h + y] = gray.at(x, y);
    }
  }

  std::vector<double> weights(cfg.n + 1, 0.0);
  for (int d = 1; d <= cfg.n; ++d) {
    weights[d] = 1.0 / std::pow(static_cast<double>(d), cfg.p);
  }

  SweepState state;
  state.height = h;
  state.k = cfg.k;
  state.pad = cfg.pad_value;
  state.overlap_only = cfg.overlap_only_norm;
  state.shifted.resize(static_cast<std::size_t>(w) * h);
  state.pad_prefix.resize(static_cast<std::size_t>(w) * (h + 1));

  ShiftProfile profile;
  profile.shifts.assign(w, 0);
  state.finalize_column(0, source.data(), 0);

  // Tie-break order: smallest |s| first, negative before positive.
  std::vector<int> order;
  order.reserve(2 * span + 1);
  order.push_back(0);
  for (int m = 1; m <= span; ++m) {
    order.push_back(-m);
    order.push_back(m);
  }

  std::vector<double> costs(2 * span + 1);
  for (int i = 1; i < w; ++i) {
    const int j_lo = std::max(0, i - cfg.n);
    const std::uint8_t* col_i =
        source.data() + static_cast<std::size_t>(i) * h;

    if (parallel) {
#pragma omp parallel for schedule(static)
      for (int ci = 0; ci <= 2 * span; ++ci) {
        costs[ci] = candidate_cost(state, col_i, i, j_lo, ci - span, weights);
      }
    } else {
      for (int ci = 0; ci <= 2 * span; ++ci) {
        costs[ci] = candidate_cost(state, col_i, i, j_lo, ci - span, weights);
      }
    }

    int best_s = 0;
    double best_cost = costs[span];
    for (const int s : order) {
      const double c = costs[s + span];
      if (c < best_cost) {
        best_cost = c;
        best_s = s;
      }
    }
    profile.shifts[i] = best_s;
    state.finalize_column(i, col_i, best_s);
  }
  return profile;
}

template <typename Image, typename Pixel>
Image apply_shifts_impl(const Image& img, const ShiftProfile& shifts,
                        Pixel pad) {
  validate(img);
  if (static_cast<int>(shifts.shifts.size()) != img.width) {
    throw InvalidInputError("shift profile length does not match image width");
  }
  Image out = Image::filled(img.width, img.height, pad);
  for (int x = 0; x < img.width; ++x) {
    const int s = shifts.shifts[x];
    const int lo = std::max(0, s);
    const int hi = img.height + std::min(0, s);
    for (int y = lo; y < hi; ++y) {
      out.at(x, y) = img.at(x, y - s);
    }
  }
  return out;
}

}  // namespace

void validate(const AlignConfig& cfg) {
  if (cfg.n < 1) throw InvalidInputError("align window n must be >= 1");
  if (cfg.k != 1 && cfg.k != 2) {
    throw InvalidInputError("align norm order k must be 1 or 2");
  }
  if (cfg.max_shift < 0) throw InvalidInputError("max_shift must be >= 0");
  if (!std::isfinite(cfg.p)) throw InvalidInputError("weight exponent p must be finite");
}

GrayImage to_grayscale(const RgbImage& img) {
  validate(img);
  GrayImage out = GrayImage::filled(img.width, img.height, 0);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const Rgb px = img.data[i];
    const double luma = 0.299 * px.r + 0.587 * px.g + 0.114 * px.b;
    out.data[i] = static_cast<std::uint8_t>(
        std::clamp<long>(std::lround(luma), 0, 255));
  }
  return out;
}

ShiftProfile optimal_shifts(const GrayImage& gray, const AlignConfig& cfg) {
  return compute_shifts(gray, cfg, /*parallel=*/true);
}

ShiftProfile optimal_shifts_serial(const GrayImage& gray,
                                   const AlignConfig& cfg) {
  return compute_shifts(gray, cfg, /*parallel=*/false);
}

RgbImage apply_shifts(const RgbImage& img, const ShiftProfile& shifts,
                      Rgb pad) {
  return apply_shifts_impl(img, shifts, pad);
}

GrayImage apply_shifts(const GrayImage& img, const ShiftProfile& shifts,
                       std::uint8_t pad) {
  return apply_shifts_impl(img, shifts, pad);
}

ShiftProfile threshold_align(const GrayImage& gray, int threshold) {
  validate(gray);
  if (threshold <= 0 || threshold >= 255) {
    throw InvalidInputError("threshold must lie strictly between 0 and 255");
  }

  const auto first_above = [&](int x) -> int {
    for (int y = 0; y < gray.height; ++y) {
      if (gray.at(x, y) > threshold) return y;
    }
    return -1;
  };

  std::vector<int> firsts(gray.width);
  for (int x = 0; x < gray.width; ++x) firsts[x] = first_above(x);

  int ref = firsts.empty() ? -1 : firsts[0];
  if (ref < 0) {
    for (int x = 1; x < gray.width && ref < 0; ++x) ref = firsts[x];
  }

  ShiftProfile profile;
  profile.shifts.assign(gray.width, 0);
  if (ref >= 0) {
    for (int x = 0; x < gray.width; ++x) {
      profile.shifts[x] = firsts[x] < 0 ? 0 : ref - firsts[x];
    }
  }
  return profile;
}

}  // namespace knotdet
