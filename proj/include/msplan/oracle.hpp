#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "error.hpp"
#include "field.hpp"
#include "rng.hpp"

namespace msplan {

/// Altitude-dependent segmentation error model. A sensor pixel of true class c
/// is mislabelled with probability min(base_error[c] + error_slope[c] *
/// max(0, gsd - gsd_ref), error_cap), the wrong label drawn from confusion[c].
struct OracleParams {
  std::array<double, kNumClasses> base_error{0.01, 0.03, 0.05};
  std::array<double, kNumClasses> error_slope{0.2, 7.5, 15.0};  // probability per (m/px)
  double error_cap = 0.35;
  double gsd_ref = 0.01;  // GSD at which base_error applies
  std::array<std::array<double, kNumClasses>, kNumClasses> confusion{{
      {0.0, 0.7, 0.3},
      {0.3, 0.0, 0.7},
      {0.2, 0.8, 0.0},
  }};
  std::uint64_t seed = 0;

  /// Checks the ranges and that the error never exceeds the cap up to `gsd_max`.
  void validate(double gsd_max = 0.03) const {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (!(base_error[c] >= 0.0 && base_error[c] < 1.0)) {
        throw InvalidArgument("OracleParams: base_error must lie in [0, 1)");
      }
      if (!(error_slope[c] >= 0.0)) throw InvalidArgument("OracleParams: error_slope must be >= 0");
      double sum = 0.0;
      for (double p : confusion[c]) {
        if (p < 0.0) throw InvalidArgument("OracleParams: negative confusion probability");
        sum += p;
      }
      if (confusion[c][c] != 0.0 || std::abs(sum - 1.0) > 1e-9) {
        throw InvalidArgument("OracleParams: confusion rows must sum to 1 with a zero diagonal");
      }
      if (base_error[c] + error_slope[c] * std::max(0.0, gsd_max - gsd_ref) > error_cap + 1e-12) {
        throw InvalidArgument("OracleParams: error exceeds the cap within the GSD range");
      }
    }
    if (!(error_cap > 0.0 && error_cap <= 1.0)) {
      throw InvalidArgument("OracleParams: error_cap must lie in (0, 1]");
    }
    if (!(gsd_ref > 0.0)) throw InvalidArgument("OracleParams: gsd_ref must be positive");
  }

  double error_rate(double gsd, ClassId c) const {
    const std::size_t i = index_of(c);
    return std::min(base_error[i] + error_slope[i] * std::max(0.0, gsd - gsd_ref), error_cap);
  }

  static OracleParams noiseless() {
    OracleParams p;
    p.base_error = {0.0, 0.0, 0.0};
    p.error_slope = {0.0, 0.0, 0.0};
    return p;
  }
};

/// Stable identifier of an image taken at ground position `at` with `gsd`:
/// identical images in different missions receive identical noise.
inline std::uint64_t image_uid(Point2 at, double gsd) {
  auto q = [](double v) { return static_cast<std::uint64_t>(std::llround(v * 1e6)); };
  return hash_combine(hash_combine(q(at.x), q(at.y)), q(gsd));
}

namespace detail {

inline std::size_t sensor_pixels(double extent, double gsd) {
  return static_cast<std::size_t>(std::max(1.0, std::round(extent / gsd)));
}

inline void check_footprint(const LabelGrid& gt, const Rect& fp, double gsd) {
  if (gsd < gt.resolution() * (1.0 - 1e-9)) {
    throw InvalidArgument("observe: GSD is finer than the ground-truth resolution");
  }
  if (!gt.extent().contains(fp, 1e-6)) {
    throw InvalidArgument("observe: footprint exceeds the ground-truth extent");
  }
}

}  // namespace detail

/// Resolution loss only: each `gsd`-sized sensor pixel over `fp` takes the
/// majority class of the ground-truth cells whose centers it contains (ties
/// resolved toward the lower class code).
inline LabelGrid pool_majority(const LabelGrid& gt, const Rect& fp, double gsd) {
  detail::check_footprint(gt, fp, gsd);
  const std::size_t nx = detail::sensor_pixels(fp.width(), gsd);
  const std::size_t ny = detail::sensor_pixels(fp.height(), gsd);

  std::vector<CellRange> col_ranges(nx), row_ranges(ny);
  for (std::size_t j = 0; j < nx; ++j) {
    const double x0 = fp.x_min + static_cast<double>(j) * gsd;
    col_ranges[j] = gt.cells_in({x0, fp.y_min, x0 + gsd, fp.y_max});
  }
  for (std::size_t i = 0; i < ny; ++i) {
    const double y1 = fp.y_max - static_cast<double>(i) * gsd;
    row_ranges[i] = gt.cells_in({fp.x_min, y1 - gsd, fp.x_max, y1});
  }

  LabelGrid out(nx, ny, gsd, {fp.x_min, fp.y_max - static_cast<double>(ny) * gsd});
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      std::array<std::size_t, kNumClasses> counts{};
      const CellRange& rr = row_ranges[i];
      const CellRange& cr = col_ranges[j];
      for (std::size_t r = rr.row_begin; r < rr.row_end; ++r) {
        const ClassId* row = gt.cells().data() + r * gt.width();
        for (std::size_t c = cr.col_begin; c < cr.col_end; ++c) ++counts[index_of(row[c])];
      }
      std::size_t best = 0;
      for (std::size_t k = 1; k < kNumClasses; ++k) {
        if (counts[k] > counts[best]) best = k;
      }
      out.set(i, j, static_cast<ClassId>(best));
    }
  }
  return out;
}

/// Simulated segmentation of footprint `fp` imaged at `gsd`: majority pooling
/// followed by independent per-pixel confusion noise. Output is at sensor
/// resolution. Noise for pixel k is keyed by (params.seed, uid, k) only.
inline LabelGrid observe(const LabelGrid& gt, const Rect& fp, double gsd,
                         const OracleParams& params, std::uint64_t uid) {
  LabelGrid out = pool_majority(gt, fp, gsd);
  const CounterRng rng(params.seed, uid);
  auto cells = out.mutable_cells();
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const ClassId truth = cells[k];
    if (rng.uniform(2 * k) >= params.error_rate(gsd, truth)) continue;
    const auto& row = params.confusion[index_of(truth)];
    const double u = rng.uniform(2 * k + 1);
    double acc = 0.0;
    ClassId emitted = truth;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (row[c] <= 0.0) continue;
      acc += row[c];
      emitted = static_cast<ClassId>(c);
      if (u < acc) break;
    }
    cells[k] = emitted;
  }
  return out;
}

/// Nearest-neighbour replication onto a `base_resolution` lattice covering the
/// same extent: each base cell takes the sensor pixel containing its center.
inline LabelGrid upsample_to_base(const LabelGrid& seg, double base_resolution) {
  if (seg.resolution() < base_resolution * (1.0 - 1e-9)) {
    throw InvalidArgument("upsample_to_base: segmentation is finer than the base resolution");
  }
  const double ratio = seg.resolution() / base_resolution;
  const auto w = static_cast<std::size_t>(std::llround(static_cast<double>(seg.width()) * ratio));
  const auto h = static_cast<std::size_t>(std::llround(static_cast<double>(seg.height()) * ratio));
  LabelGrid out(w, h, base_resolution, seg.origin());

  std::vector<std::size_t> src_col(w), src_row(h);
  for (std::size_t c = 0; c < w; ++c) {
    const double x = (static_cast<double>(c) + 0.5) * base_resolution;
    src_col[c] = std::min(seg.width() - 1, static_cast<std::size_t>(x / seg.resolution()));
  }
  for (std::size_t r = 0; r < h; ++r) {
    // Rows count from the north edge in both grids.
    const double y = (static_cast<double>(r) + 0.5) * base_resolution;
    src_row[r] = std::min(seg.height() - 1, static_cast<std::size_t>(y / seg.resolution()));
  }
  auto dst = out.mutable_cells();
  for (std::size_t r = 0; r < h; ++r) {
    const ClassId* src = seg.cells().data() + src_row[r] * seg.width();
    for (std::size_t c = 0; c < w; ++c) dst[r * w + c] = src[src_col[c]];
  }
  return out;
}

}  // namespace msplan
