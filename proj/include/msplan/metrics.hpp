#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "error.hpp"
#include "field.hpp"

namespace msplan {

inline std::array<std::size_t, kNumClasses> class_counts(const LabelGrid& seg) {
  std::array<std::size_t, kNumClasses> n{};
  for (ClassId c : seg.cells()) ++n[index_of(c)];
  return n;
}

/// Fraction of crop and weed pixels.
inline double vegetation_ratio(const LabelGrid& seg) {
  if (seg.empty()) throw InvalidArgument("vegetation_ratio: empty grid");
  const auto n = class_counts(seg);
  return static_cast<double>(n[index_of(ClassId::crop)] + n[index_of(ClassId::weed)]) /
         static_cast<double>(seg.size());
}

struct SegStats {
  double vegetation_ratio = 0.0;
  /// Per-class IoU; empty for classes absent from both prediction and truth.
  std::array<std::optional<double>, kNumClasses> iou{};
  /// Mean of the present per-class IoUs.
  double miou = 0.0;
  std::size_t pixel_count = 0;
};

namespace detail {

struct Confusion {
  std::array<std::size_t, kNumClasses> inter{};
  std::array<std::size_t, kNumClasses> uni{};
};

inline SegStats finish_stats(const Confusion& cm, std::size_t n, double vratio) {
  SegStats s;
  s.vegetation_ratio = vratio;
  s.pixel_count = n;
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    if (cm.uni[c] == 0) continue;
    s.iou[c] = static_cast<double>(cm.inter[c]) / static_cast<double>(cm.uni[c]);
    sum += *s.iou[c];
    ++present;
  }
  s.miou = present ? sum / static_cast<double>(present) : 0.0;
  return s;
}

inline void check_same_shape(const LabelGrid& a, const LabelGrid& b) {
  if (a.width() != b.width() || a.height() != b.height() ||
      std::abs(a.resolution() - b.resolution()) > 1e-12 * b.resolution()) {
    throw InvalidArgument("miou: prediction and ground truth differ in shape or resolution");
  }
}

}  // namespace detail

/// Per-class IoU and their mean over the classes present in either map.
inline SegStats miou(const LabelGrid& pred, const LabelGrid& gt) {
  detail::check_same_shape(pred, gt);
  detail::Confusion cm;
  auto p = pred.cells();
  auto g = gt.cells();
  std::size_t veg = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t a = index_of(p[i]);
    const std::size_t b = index_of(g[i]);
    veg += a != 0;
    if (a == b) {
      ++cm.inter[a];
      ++cm.uni[a];
    } else {
      ++cm.uni[a];
      ++cm.uni[b];
    }
  }
  const double vr = p.empty() ? 0.0 : static_cast<double>(veg) / static_cast<double>(p.size());
  return detail::finish_stats(cm, p.size(), vr);
}

/// Base-resolution map keeping, per cell, the label from the finest GSD seen.
class FusedMap {
 public:
  static constexpr float kUnobserved = std::numeric_limits<float>::infinity();

  FusedMap() = default;

  /// Empty map with the geometry of `like`.
  explicit FusedMap(const LabelGrid& like)
      : labels_(like.width(), like.height(), like.resolution(), like.origin()),
        provenance_(like.size(), kUnobserved) {}

  const LabelGrid& labels() const noexcept { return labels_; }
  const std::vector<float>& provenance() const noexcept { return provenance_; }

  std::size_t unobserved_count() const {
    std::size_t n = 0;
    for (float p : provenance_) n += std::isinf(p);
    return n;
  }

  /// Writes each cell of `seg_at_base` inside `fp` iff `gsd_source` is strictly
  /// finer than what the cell already holds (first write wins on ties).
  void fuse(const LabelGrid& seg_at_base, double gsd_source, const Rect& fp) {
    const double res = labels_.resolution();
    if (std::abs(seg_at_base.resolution() - res) > 1e-9 * res) {
      throw InvalidArgument("fuse: segmentation is not at base resolution");
    }
    const double dx = (seg_at_base.origin().x - labels_.origin().x) / res;
    const double dy = (seg_at_base.origin().y - labels_.origin().y) / res;
    if (std::abs(dx - std::round(dx)) > 1e-6 || std::abs(dy - std::round(dy)) > 1e-6) {
      throw InvalidArgument("fuse: segmentation is not aligned with the map lattice");
    }
    const long col0 = std::lround(dx);
    const long south0 = std::lround(dy);
    const long row0 = static_cast<long>(labels_.height()) - south0 -
                      static_cast<long>(seg_at_base.height());
    if (col0 < 0 || row0 < 0 ||
        col0 + static_cast<long>(seg_at_base.width()) > static_cast<long>(labels_.width()) ||
        south0 < 0) {
      throw InvalidArgument("fuse: segmentation extends beyond the map");
    }
    const CellRange in = labels_.cells_in(fp);
    if (in.empty()) throw InvalidArgument("fuse: footprint does not intersect the map");
    const auto g = static_cast<float>(gsd_source);
    auto dst = labels_.mutable_cells();
    for (std::size_t r = in.row_begin; r < in.row_end; ++r) {
      const long sr = static_cast<long>(r) - row0;
      if (sr < 0 || sr >= static_cast<long>(seg_at_base.height())) {
        throw InvalidArgument("fuse: footprint is not covered by the segmentation");
      }
      for (std::size_t c = in.col_begin; c < in.col_end; ++c) {
        const long sc = static_cast<long>(c) - col0;
        if (sc < 0 || sc >= static_cast<long>(seg_at_base.width())) {
          throw InvalidArgument("fuse: footprint is not covered by the segmentation");
        }
        const std::size_t k = r * labels_.width() + c;
        if (g < provenance_[k]) {
          provenance_[k] = g;
          dst[k] = seg_at_base.at(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
      }
    }
  }

 private:
  LabelGrid labels_;
  std::vector<float> provenance_;
};

/// Field-level score of a fused map. Unobserved cells never match: they add to
/// the union of their true class and to no intersection.
inline SegStats field_miou(const FusedMap& map, const LabelGrid& gt) {
  detail::check_same_shape(map.labels(), gt);
  detail::Confusion cm;
  auto p = map.labels().cells();
  auto g = gt.cells();
  const auto& prov = map.provenance();
  std::size_t veg = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::size_t b = index_of(g[i]);
    if (std::isinf(prov[i])) {
      ++cm.uni[b];
      continue;
    }
    const std::size_t a = index_of(p[i]);
    veg += a != 0;
    if (a == b) {
      ++cm.inter[a];
      ++cm.uni[a];
    } else {
      ++cm.uni[a];
      ++cm.uni[b];
    }
  }
  const double vr = p.empty() ? 0.0 : static_cast<double>(veg) / static_cast<double>(p.size());
  return detail::finish_stats(cm, p.size(), vr);
}

}  // namespace msplan
