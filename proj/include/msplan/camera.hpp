#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "field.hpp"

namespace msplan {

/// Pinhole nadir camera. Footprint height uses the same GSD as the width.
struct CameraModel {
  double sensor_width_mm = 6.17;
  double focal_length_mm = 3.6;
  std::size_t image_width_px = 4000;
  std::size_t image_height_px = 3000;

  void validate() const {
    if (!(sensor_width_mm > 0.0) || !(focal_length_mm > 0.0) || image_width_px == 0 ||
        image_height_px == 0) {
      throw InvalidArgument("CameraModel: all intrinsics must be positive");
    }
  }

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

/// GSD in m/px for altitude `h` in meters: h * S_w / (f * I_w). The mm of the
/// sensor width and focal length cancel, so meters in give m/px out.
inline double gsd_at_altitude(const CameraModel& cam, double h) {
  if (!(h > 0.0)) throw InvalidArgument("gsd_at_altitude: altitude must be positive");
  return h * cam.sensor_width_mm /
         (cam.focal_length_mm * static_cast<double>(cam.image_width_px));
}

inline double altitude_at_gsd(const CameraModel& cam, double gsd) {
  if (!(gsd > 0.0)) throw InvalidArgument("altitude_at_gsd: GSD must be positive");
  return gsd * cam.focal_length_mm * static_cast<double>(cam.image_width_px) /
         cam.sensor_width_mm;
}

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

enum class WaypointLevel { survey, inspect };

struct Waypoint {
  Point3 position;
  double gsd = 0.0;
  WaypointLevel level = WaypointLevel::survey;

  Point2 ground() const noexcept { return {position.x, position.y}; }

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// Builds a waypoint whose altitude is derived from `gsd`.
inline Waypoint make_waypoint(const CameraModel& cam, Point2 at, double gsd, WaypointLevel level) {
  return {{at.x, at.y, altitude_at_gsd(cam, gsd)}, gsd, level};
}

inline Rect footprint(const CameraModel& cam, const Waypoint& wp) {
  return Rect::centered(wp.ground(), wp.gsd * static_cast<double>(cam.image_width_px),
                        wp.gsd * static_cast<double>(cam.image_height_px));
}

/// Candidate GSDs, strictly decreasing (coarse to fine). rungs()[0] is the
/// survey GSD.
class GsdLadder {
 public:
  GsdLadder() = default;

  explicit GsdLadder(std::vector<double> rungs_m_per_px) : rungs_(std::move(rungs_m_per_px)) {
    if (rungs_.empty()) throw InvalidArgument("GsdLadder: at least one rung required");
    for (std::size_t i = 0; i < rungs_.size(); ++i) {
      if (!(rungs_[i] > 0.0)) throw InvalidArgument("GsdLadder: rungs must be positive");
      if (i > 0 && !(rungs_[i] < rungs_[i - 1])) {
        throw InvalidArgument("GsdLadder: rungs must be strictly decreasing");
      }
    }
  }

  static GsdLadder from_cm(std::initializer_list<double> cm) {
    std::vector<double> m;
    for (double v : cm) m.push_back(v / 100.0);
    return GsdLadder(std::move(m));
  }

  static GsdLadder from_cm(const std::vector<double>& cm) {
    std::vector<double> m;
    for (double v : cm) m.push_back(v / 100.0);
    return GsdLadder(std::move(m));
  }

  /// {3.0, 2.5, 2.0, 1.5, 1.0} cm/px.
  static GsdLadder standard() { return from_cm({3.0, 2.5, 2.0, 1.5, 1.0}); }

  const std::vector<double>& rungs() const& noexcept { return rungs_; }
  std::vector<double> rungs() && { return std::move(rungs_); }
  std::size_t size() const noexcept { return rungs_.size(); }
  double survey() const { return rungs_.front(); }
  double finest() const { return rungs_.back(); }

  /// Index of the rung equal to `gsd` within a relative tolerance, or size().
  std::size_t index_of(double gsd) const {
    for (std::size_t i = 0; i < rungs_.size(); ++i) {
      if (std::abs(rungs_[i] - gsd) <= 1e-9 * rungs_[i]) return i;
    }
    return rungs_.size();
  }

  bool contains(double gsd) const { return index_of(gsd) < rungs_.size(); }

  /// Nearest rung to `gsd`; exact ties go to the coarser rung.
  double snap(double gsd) const {
    double best = rungs_.front();
    double best_d = std::abs(gsd - best);
    for (double r : rungs_) {
      const double d = std::abs(gsd - r);
      if (d < best_d - 1e-12 * r) {
        best = r;
        best_d = d;
      }
    }
    return best;
  }

  friend bool operator==(const GsdLadder&, const GsdLadder&) = default;

 private:
  std::vector<double> rungs_;
};

namespace detail {

/// Centers of `n = ceil(span / step)` tiles of width `step` over [lo, lo+span];
/// the last tile is shifted inward so it ends at the far edge.
inline std::vector<double> tile_centers(double lo, double span, double step) {
  const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / step - 1e-9)));
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::min(lo + (static_cast<double>(i) + 0.5) * step, lo + span - 0.5 * step);
  }
  return c;
}

/// Serpentine ordering over a column/row lattice. Starts at the corner
/// selected by (from_right, from_top) and sweeps along x.
inline std::vector<Point2> boustrophedon(const std::vector<double>& xs, std::vector<double> ys,
                                         bool from_right, bool from_top) {
  if (from_top) std::reverse(ys.begin(), ys.end());
  std::vector<Point2> out;
  out.reserve(xs.size() * ys.size());
  for (std::size_t r = 0; r < ys.size(); ++r) {
    const bool reverse = (r % 2 == 1) != from_right;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out.push_back({xs[reverse ? xs.size() - 1 - i : i], ys[r]});
    }
  }
  return out;
}

}  // namespace detail

/// Lawn-mower survey over `field`, starting at its south-west corner.
inline std::vector<Waypoint> survey_grid(const Rect& field, const CameraModel& cam,
                                         double gsd_survey) {
  cam.validate();
  const double fw = gsd_survey * static_cast<double>(cam.image_width_px);
  const double fh = gsd_survey * static_cast<double>(cam.image_height_px);
  if (fw > field.width() * (1.0 + 1e-9) || fh > field.height() * (1.0 + 1e-9)) {
    throw InvalidArgument("survey_grid: footprint is larger than the field");
  }
  const auto xs = detail::tile_centers(field.x_min, field.width(), fw);
  const auto ys = detail::tile_centers(field.y_min, field.height(), fh);
  std::vector<Waypoint> out;
  for (Point2 p : detail::boustrophedon(xs, ys, false, false)) {
    out.push_back(make_waypoint(cam, p, gsd_survey, WaypointLevel::survey));
  }
  return out;
}

/// Lawn-mower re-observation of `parent`'s footprint at the finer `gsd_child`,
/// starting at the lattice corner nearest to `entry` (ties: west, then south).
inline std::vector<Waypoint> inspection_grid(const Waypoint& parent, const CameraModel& cam,
                                             double gsd_child, Point2 entry) {
  if (!(gsd_child < parent.gsd)) {
    throw InvalidArgument("inspection_grid: child GSD must be finer than the parent GSD");
  }
  const Rect fp = footprint(cam, parent);
  const double cw = gsd_child * static_cast<double>(cam.image_width_px);
  const double ch = gsd_child * static_cast<double>(cam.image_height_px);
  const auto xs = detail::tile_centers(fp.x_min, fp.width(), cw);
  const auto ys = detail::tile_centers(fp.y_min, fp.height(), ch);
  const bool from_right = std::abs(entry.x - xs.back()) < std::abs(entry.x - xs.front());
  const bool from_top = std::abs(entry.y - ys.back()) < std::abs(entry.y - ys.front());
  std::vector<Waypoint> out;
  for (Point2 p : detail::boustrophedon(xs, ys, from_right, from_top)) {
    out.push_back(make_waypoint(cam, p, gsd_child, WaypointLevel::inspect));
  }
  return out;
}

}  // namespace msplan
