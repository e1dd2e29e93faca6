#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "rng.hpp"

namespace msplan {

enum class ClassId : std::uint8_t { soil = 0, crop = 1, weed = 2 };

inline constexpr std::size_t kNumClasses = 3;

constexpr std::size_t index_of(ClassId c) noexcept { return static_cast<std::size_t>(c); }

constexpr bool is_vegetation(ClassId c) noexcept { return c != ClassId::soil; }

inline const char* class_name(ClassId c) {
  switch (c) {
    case ClassId::soil: return "soil";
    case ClassId::crop: return "crop";
    case ClassId::weed: return "weed";
  }
  return "?";
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Axis-aligned rectangle in the world frame (x east, y north).
struct Rect {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  static Rect centered(Point2 c, double width, double height) {
    return {c.x - 0.5 * width, c.y - 0.5 * height, c.x + 0.5 * width, c.y + 0.5 * height};
  }

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return std::max(0.0, width()) * std::max(0.0, height()); }
  Point2 center() const noexcept { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }

  bool contains(const Rect& o, double tol = 1e-9) const noexcept {
    return o.x_min >= x_min - tol && o.y_min >= y_min - tol && o.x_max <= x_max + tol &&
           o.y_max <= y_max + tol;
  }

  Rect intersection(const Rect& o) const noexcept {
    return {std::max(x_min, o.x_min), std::max(y_min, o.y_min), std::min(x_max, o.x_max),
            std::min(y_max, o.y_max)};
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Half-open block of grid cells [row_begin, row_end) x [col_begin, col_end).
struct CellRange {
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  std::size_t col_begin = 0;
  std::size_t col_end = 0;

  std::size_t rows() const noexcept { return row_end - row_begin; }
  std::size_t cols() const noexcept { return col_end - col_begin; }
  bool empty() const noexcept { return rows() == 0 || cols() == 0; }
};

/// Row-major raster of class labels. Row 0 is the northernmost row; `origin`
/// is the world position of the grid's south-west corner.
class LabelGrid {
 public:
  LabelGrid() = default;

  LabelGrid(std::size_t width, std::size_t height, double resolution, Point2 origin = {},
            ClassId fill = ClassId::soil)
      : width_(width), height_(height), resolution_(resolution), origin_(origin),
        cells_(width * height, fill) {
    check();
  }

  LabelGrid(std::size_t width, std::size_t height, double resolution, Point2 origin,
            std::vector<ClassId> cells)
      : width_(width), height_(height), resolution_(resolution), origin_(origin),
        cells_(std::move(cells)) {
    check();
    if (cells_.size() != width_ * height_) {
      throw InvalidArgument("LabelGrid: cell count does not match width x height");
    }
    for (ClassId c : cells_) {
      if (index_of(c) >= kNumClasses) throw InvalidArgument("LabelGrid: invalid class code");
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return cells_.size(); }
  bool empty() const noexcept { return cells_.empty(); }
  double resolution() const noexcept { return resolution_; }
  Point2 origin() const noexcept { return origin_; }

  Rect extent() const noexcept {
    return {origin_.x, origin_.y, origin_.x + static_cast<double>(width_) * resolution_,
            origin_.y + static_cast<double>(height_) * resolution_};
  }

  ClassId at(std::size_t row, std::size_t col) const { return cells_[row * width_ + col]; }
  void set(std::size_t row, std::size_t col, ClassId c) { cells_[row * width_ + col] = c; }

  std::span<const ClassId> cells() const noexcept { return cells_; }
  std::span<ClassId> mutable_cells() noexcept { return cells_; }

  Point2 cell_center(std::size_t row, std::size_t col) const noexcept {
    return {origin_.x + (static_cast<double>(col) + 0.5) * resolution_,
            origin_.y + (static_cast<double>(height_ - row) - 0.5) * resolution_};
  }

  /// Cells whose centers fall inside the half-open rectangle
  /// [x_min, x_max) x [y_min, y_max), clipped to the grid.
  CellRange cells_in(const Rect& r) const noexcept {
    auto lo = [this](double v, double o, std::size_t n) {
      double k = std::ceil((v - o) / resolution_ - 0.5);
      return static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n)));
    };
    CellRange out;
    out.col_begin = lo(r.x_min, origin_.x, width_);
    out.col_end = std::max(out.col_begin, lo(r.x_max, origin_.x, width_));
    // Count from the south edge, then flip to row indices.
    std::size_t b_lo = lo(r.y_min, origin_.y, height_);
    std::size_t b_hi = std::max(b_lo, lo(r.y_max, origin_.y, height_));
    out.row_begin = height_ - b_hi;
    out.row_end = height_ - b_lo;
    return out;
  }

  friend bool operator==(const LabelGrid&, const LabelGrid&) = default;

 private:
  void check() const {
    if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
      throw InvalidArgument("LabelGrid: resolution must be positive");
    }
  }

  std::size_t width_ = 0;
  std::size_t height_ = 0;
  double resolution_ = 1.0;
  Point2 origin_{};
  std::vector<ClassId> cells_;
};

/// Sub-grid of the cells whose centers fall inside `rect`. Resolution is kept,
/// the origin moves to the south-west corner of the selected block.
inline LabelGrid crop_window(const LabelGrid& grid, const Rect& rect) {
  CellRange range = grid.cells_in(rect);
  if (range.empty()) throw InvalidArgument("crop_window: rectangle does not intersect the grid");
  std::vector<ClassId> cells;
  cells.reserve(range.rows() * range.cols());
  for (std::size_t r = range.row_begin; r < range.row_end; ++r) {
    auto row = grid.cells().subspan(r * grid.width() + range.col_begin, range.cols());
    cells.insert(cells.end(), row.begin(), row.end());
  }
  Point2 origin{grid.origin().x + static_cast<double>(range.col_begin) * grid.resolution(),
                grid.origin().y +
                    static_cast<double>(grid.height() - range.row_end) * grid.resolution()};
  return LabelGrid(range.cols(), range.rows(), grid.resolution(), origin, std::move(cells));
}

// ---------------------------------------------------------------------------
// Synthetic field generation

/// Parameters of a synthetic crop/weed field. Crops are discs on parallel
/// east-west rows; weeds are small discs scattered inside disc-shaped clusters.
struct FieldSpec {
  double width_m = 18.0;
  double height_m = 12.0;
  double base_resolution = 0.005;
  double row_spacing_m = 0.5;
  double crop_radius_m = 0.06;
  double crop_jitter_m = 0.03;
  double plant_spacing_m = 0.25;  // along a row
  std::size_t weed_cluster_count = 3;
  double weed_cluster_radius_m = 1.5;
  double weed_density = 0.3;      // fraction of a cluster's area covered by weed discs
  double weed_radius_m = 0.02;
  std::uint64_t seed = 1;

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument(std::string("FieldSpec: ") + what + " must be positive");
      }
    };
    positive(width_m, "width_m");
    positive(height_m, "height_m");
    positive(base_resolution, "base_resolution");
    positive(row_spacing_m, "row_spacing_m");
    positive(crop_radius_m, "crop_radius_m");
    positive(plant_spacing_m, "plant_spacing_m");
    positive(weed_cluster_radius_m, "weed_cluster_radius_m");
    positive(weed_radius_m, "weed_radius_m");
    if (crop_jitter_m < 0.0) throw InvalidArgument("FieldSpec: crop_jitter_m must be >= 0");
    if (!(weed_density >= 0.0 && weed_density <= 1.0)) {
      throw InvalidArgument("FieldSpec: weed_density must lie in [0, 1]");
    }
    if (width_m < base_resolution || height_m < base_resolution) {
      throw InvalidArgument("FieldSpec: extent is smaller than one pixel");
    }
  }
};

struct PlantDisc {
  Point2 center;
  double radius = 0.0;
  ClassId cls = ClassId::crop;
};

namespace detail {
enum : std::uint64_t { kStreamCrop = 1, kStreamClusterCenter = 2, kStreamWeed = 3 };

inline std::size_t fit_count(double length, double spacing) {
  return static_cast<std::size_t>(std::floor(length / spacing + 1e-9));
}
}  // namespace detail

/// Every disc the generator plants, crops first. Each draw is keyed by the
/// plant's index, so the layout is a pure function of the spec.
inline std::vector<PlantDisc> plant_layout(const FieldSpec& spec) {
  spec.validate();
  std::vector<PlantDisc> discs;

  const std::size_t n_rows = detail::fit_count(spec.height_m, spec.row_spacing_m);
  const std::size_t n_per_row = detail::fit_count(spec.width_m, spec.plant_spacing_m);
  const double row_offset = 0.5 * (spec.height_m - static_cast<double>(n_rows) * spec.row_spacing_m);
  const double col_offset =
      0.5 * (spec.width_m - static_cast<double>(n_per_row) * spec.plant_spacing_m);
  const CounterRng crop_rng(spec.seed, detail::kStreamCrop);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const double y = row_offset + (static_cast<double>(r) + 0.5) * spec.row_spacing_m;
    for (std::size_t i = 0; i < n_per_row; ++i) {
      const std::uint64_t id = r * n_per_row + i;
      const double x = col_offset + (static_cast<double>(i) + 0.5) * spec.plant_spacing_m;
      const double jx = crop_rng.uniform(2 * id, -spec.crop_jitter_m, spec.crop_jitter_m);
      const double jy = crop_rng.uniform(2 * id + 1, -spec.crop_jitter_m, spec.crop_jitter_m);
      discs.push_back({{x + jx, y + jy}, spec.crop_radius_m, ClassId::crop});
    }
  }

  const CounterRng center_rng(spec.seed, detail::kStreamClusterCenter);
  const double cluster_ratio = spec.weed_cluster_radius_m / spec.weed_radius_m;
  const auto weeds_per_cluster =
      static_cast<std::size_t>(std::llround(spec.weed_density * cluster_ratio * cluster_ratio));
  for (std::size_t k = 0; k < spec.weed_cluster_count; ++k) {
    const Point2 c{center_rng.uniform(2 * k, 0.0, spec.width_m),
                   center_rng.uniform(2 * k + 1, 0.0, spec.height_m)};
    const CounterRng weed_rng(spec.seed, hash_combine(detail::kStreamWeed, k));
    for (std::size_t i = 0; i < weeds_per_cluster; ++i) {
      const double rad = spec.weed_cluster_radius_m * std::sqrt(weed_rng.uniform(2 * i));
      const double theta = 2.0 * std::numbers::pi * weed_rng.uniform(2 * i + 1);
      discs.push_back({{c.x + rad * std::cos(theta), c.y + rad * std::sin(theta)},
                       spec.weed_radius_m, ClassId::weed});
    }
  }
  return discs;
}

/// Paints discs in order; later discs overwrite earlier ones.
inline void rasterize_discs(LabelGrid& grid, std::span<const PlantDisc> discs) {
  for (const PlantDisc& d : discs) {
    const Rect box = Rect::centered(d.center, 2.0 * d.radius, 2.0 * d.radius);
    const CellRange range = grid.cells_in(box);
    const double r2 = d.radius * d.radius;
    for (std::size_t r = range.row_begin; r < range.row_end; ++r) {
      for (std::size_t c = range.col_begin; c < range.col_end; ++c) {
        const Point2 p = grid.cell_center(r, c);
        const double dx = p.x - d.center.x;
        const double dy = p.y - d.center.y;
        if (dx * dx + dy * dy <= r2) grid.set(r, c, d.cls);
      }
    }
  }
}

inline LabelGrid generate_field(const FieldSpec& spec) {
  spec.validate();
  const auto w = static_cast<std::size_t>(std::floor(spec.width_m / spec.base_resolution + 1e-9));
  const auto h = static_cast<std::size_t>(std::floor(spec.height_m / spec.base_resolution + 1e-9));
  LabelGrid grid(w, h, spec.base_resolution);
  const std::vector<PlantDisc> discs = plant_layout(spec);
  rasterize_discs(grid, discs);
  return grid;
}

}  // namespace msplan
