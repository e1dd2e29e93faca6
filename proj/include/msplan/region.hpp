#pragma once

// Imaging primitives shared by offline initialization and mission execution.

#include <cmath>
#include <optional>
#include <vector>

#include "camera.hpp"
#include "field.hpp"
#include "metrics.hpp"
#include "oracle.hpp"

namespace msplan {

struct Capture {
  Waypoint waypoint;
  Rect footprint;
  LabelGrid image;                    // at sensor resolution
  double vegetation_ratio = 0.0;      // of `image`
  std::optional<double> image_miou;   // vs pooled truth, when scoring is enabled
};

/// One image taken from `wp`. When `score` is set, the per-image mIoU is
/// computed at sensor resolution against the noiseless pooled truth.
inline Capture capture(const LabelGrid& truth, const CameraModel& cam, const Waypoint& wp,
                       const OracleParams& oracle, bool score) {
  Capture c{wp, footprint(cam, wp), {}, 0.0, std::nullopt};
  c.image = observe(truth, c.footprint, wp.gsd, oracle, image_uid(wp.ground(), wp.gsd));
  c.vegetation_ratio = vegetation_ratio(c.image);
  if (score) c.image_miou = miou(c.image, pool_majority(truth, c.footprint, wp.gsd)).miou;
  return c;
}

/// Fused base-resolution labels over `region`, built only from `captures`.
inline FusedMap fuse_region(const LabelGrid& truth, const Rect& region,
                            const std::vector<Capture>& captures) {
  FusedMap local(crop_window(truth, region));
  for (const Capture& c : captures) {
    LabelGrid up = upsample_to_base(c.image, truth.resolution());
    const Rect clip = c.footprint.intersection(region);
    local.fuse(crop_window(up, clip), c.waypoint.gsd, clip);
  }
  return local;
}

/// Footprint edges of every rung must fall on the base lattice so images can
/// be fused cell-for-cell.
inline void check_lattice_alignment(const CameraModel& cam, const GsdLadder& ladder,
                                    double base_resolution) {
  for (double g : ladder.rungs()) {
    for (std::size_t px : {cam.image_width_px, cam.image_height_px}) {
      const double cells = g * static_cast<double>(px) / base_resolution;
      if (std::abs(cells - std::round(cells)) > 1e-6) {
        throw InvalidArgument("footprint size at GSD " + std::to_string(g) +
                              " is not a multiple of the base resolution");
      }
    }
  }
}

}  // namespace msplan
