#pragma once

// Altitude decision function. Two observation sets are learned on a training
// field with ground truth:
//   O: (delta_v, delta_h)    ratio change vs altitude drop, adapted online
//   I: (delta_v, delta_miou) ratio change vs accuracy change, frozen
// where delta_x = x at survey altitude - x at the finer rung. At run time the
// observed ratio v is mapped onto the delta_v axis with proxy_alpha.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "camera.hpp"
#include "error.hpp"
#include "field.hpp"
#include "gp.hpp"
#include "metrics.hpp"
#include "oracle.hpp"
#include "region.hpp"

namespace msplan {

struct Observation {
  std::size_t region_id = 0;
  double v_hmax = 0.0;
  double gsd_child = 0.0;
  double delta_v = 0.0;
  double delta_h = 0.0;
  std::optional<double> delta_miou;  // only where ground truth exists
};

struct SamplePair {
  double delta_v = 0.0;
  double value = 0.0;  // delta_h for O, delta_miou for I

  friend bool operator==(const SamplePair&, const SamplePair&) = default;
};

struct PlannerParams {
  double v_lo_percentile = 25.0;
  double v_hi_percentile = 90.0;
  std::optional<double> v_lo;  // overrides the percentile
  std::optional<double> v_hi;
  double gain_threshold = 0.0;
  std::size_t refit_period = 5;
  bool optimize_hyperparams = true;
  Hyperparams default_hyper{};
  SearchSpace search = SearchSpace::standard();
};

struct DecisionState {
  CameraModel camera;
  GsdLadder ladder;
  std::vector<SamplePair> set_O;
  std::vector<SamplePair> set_I;
  GpModel gp_O;
  GpModel gp_I;
  double v_lo = 0.0;
  double v_hi = 1.0;
  double proxy_alpha = 0.0;
  double gain_threshold = 0.0;
  std::size_t refit_period = 5;
  std::size_t updates_since_refit = 0;
  bool optimize_hyperparams = true;
  Hyperparams default_hyper{};
  SearchSpace search = SearchSpace::standard();

  double survey_altitude() const { return altitude_at_gsd(camera, ladder.survey()); }
};

enum class Action { follow_path, descend };

struct Decision {
  Action action = Action::follow_path;
  std::optional<double> target_gsd;
  double predicted_gain = 0.0;

  static Decision follow(double gain = 0.0) { return {Action::follow_path, std::nullopt, gain}; }
  static Decision descend_to(double gsd, double gain) { return {Action::descend, gsd, gain}; }

  friend bool operator==(const Decision&, const Decision&) = default;
};

namespace detail {

// Linear interpolation between closest ranks.
inline double percentile(std::vector<double> v, double pct) {
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(pct, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline GpModel fit_pairs(const std::vector<SamplePair>& pairs, bool optimize,
                         const Hyperparams& defaults, const SearchSpace& search) {
  std::vector<double> x, y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (const SamplePair& p : pairs) {
    x.push_back(p.delta_v);
    y.push_back(p.value);
  }
  const Hyperparams hp = optimize ? optimize_hyperparams(x, y, search, defaults) : defaults;
  return GpModel::fit(std::move(x), std::move(y), hp);
}

}  // namespace detail

/// Survey image of `parent` compared with an inspection at `gsd_child` over
/// the same footprint. Ratios and mIoUs of the inspection are taken on the
/// fused base-resolution labels of the parent footprint.
struct RegionComparison {
  Observation observation;
  std::vector<Capture> children;
};

inline RegionComparison compare_region(const LabelGrid& truth, const CameraModel& cam,
                                       const Capture& survey, double gsd_child,
                                       const OracleParams& oracle, bool with_truth,
                                       Point2 entry) {
  RegionComparison out;
  const Waypoint& parent = survey.waypoint;
  for (const Waypoint& wp : inspection_grid(parent, cam, gsd_child, entry)) {
    out.children.push_back(capture(truth, cam, wp, oracle, with_truth));
  }
  const FusedMap child_map = fuse_region(truth, survey.footprint, out.children);
  Observation& obs = out.observation;
  obs.v_hmax = survey.vegetation_ratio;
  obs.gsd_child = gsd_child;
  obs.delta_v = survey.vegetation_ratio - vegetation_ratio(child_map.labels());
  obs.delta_h = parent.position.z - altitude_at_gsd(cam, gsd_child);
  if (with_truth) {
    const LabelGrid gt_region = crop_window(truth, survey.footprint);
    const FusedMap survey_map = fuse_region(truth, survey.footprint, {survey});
    obs.delta_miou = miou(survey_map.labels(), gt_region).miou - miou(child_map.labels(), gt_region).miou;
  }
  return out;
}

/// Every (survey region, finer rung) comparison on a training field.
inline std::vector<Observation> collect_training_observations(const LabelGrid& truth,
                                                              const CameraModel& cam,
                                                              const GsdLadder& ladder,
                                                              const OracleParams& oracle) {
  check_lattice_alignment(cam, ladder, truth.resolution());
  const auto grid = survey_grid(truth.extent(), cam, ladder.survey());
  if (grid.size() < 4) {
    throw InvalidArgument("initialize: training field holds fewer than 4 survey footprints");
  }
  std::vector<Observation> records;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const Capture survey = capture(truth, cam, grid[r], oracle, true);
    for (std::size_t k = 1; k < ladder.size(); ++k) {
      Observation obs =
          compare_region(truth, cam, survey, ladder.rungs()[k], oracle, true, grid[r].ground())
              .observation;
      obs.region_id = r;
      records.push_back(obs);
    }
  }
  return records;
}

inline DecisionState state_from_observations(const std::vector<Observation>& records,
                                             const CameraModel& cam, const GsdLadder& ladder,
                                             const PlannerParams& params) {
  if (ladder.size() < 2) throw InvalidArgument("initialize: ladder needs at least two rungs");
  if (records.empty()) throw DegenerateField("degenerate training field: no observations");

  DecisionState s;
  s.camera = cam;
  s.ladder = ladder;
  s.gain_threshold = params.gain_threshold;
  s.refit_period = std::max<std::size_t>(1, params.refit_period);
  s.optimize_hyperparams = params.optimize_hyperparams;
  s.default_hyper = params.default_hyper;
  s.search = params.search;

  double sum_dv = 0.0, sum_v = 0.0;
  std::size_t n_veg = 0;
  std::vector<double> v_regions;
  std::size_t last_region = static_cast<std::size_t>(-1);
  for (const Observation& o : records) {
    s.set_O.push_back({o.delta_v, o.delta_h});
    s.set_I.push_back({o.delta_v, o.delta_miou.value_or(0.0)});
    if (o.region_id != last_region) {
      v_regions.push_back(o.v_hmax);
      last_region = o.region_id;
    }
    if (o.v_hmax > 0.0) {
      sum_dv += o.delta_v;
      sum_v += o.v_hmax;
      ++n_veg;
    }
  }
  if (n_veg == 0) {
    throw DegenerateField("degenerate training field: no vegetation observed at survey altitude");
  }
  s.proxy_alpha = sum_dv / sum_v;  // ratio of means over the same records

  s.v_lo = params.v_lo.value_or(detail::percentile(v_regions, params.v_lo_percentile));
  s.v_hi = params.v_hi.value_or(detail::percentile(v_regions, params.v_hi_percentile));
  s.v_lo = std::clamp(s.v_lo, 0.0, 1.0);
  s.v_hi = std::clamp(s.v_hi, 0.0, 1.0);
  if (!(s.v_lo < s.v_hi)) {
    if (s.v_lo >= 1.0) s.v_lo = std::nextafter(1.0, 0.0);
    s.v_hi = std::nextafter(s.v_lo, 2.0);
  }

  s.gp_O = detail::fit_pairs(s.set_O, s.optimize_hyperparams, s.default_hyper, s.search);
  s.gp_I = detail::fit_pairs(s.set_I, s.optimize_hyperparams, s.default_hyper, s.search);
  return s;
}

/// Offline initialization on a field whose labels are the ground truth.
inline DecisionState initialize(const LabelGrid& truth, const CameraModel& cam,
                                const GsdLadder& ladder, const OracleParams& oracle,
                                const PlannerParams& params = {}) {
  if (ladder.size() < 2) throw InvalidArgument("initialize: ladder needs at least two rungs");
  return state_from_observations(collect_training_observations(truth, cam, ladder, oracle), cam,
                                 ladder, params);
}

/// Continue along the survey path or descend, and to which rung.
inline Decision decide(const DecisionState& s, double v) {
  if (v < s.v_lo || s.set_O.empty()) return Decision::follow();

  auto [lo, hi] = std::minmax_element(s.set_O.begin(), s.set_O.end(),
                                      [](const SamplePair& a, const SamplePair& b) {
                                        return a.delta_v < b.delta_v;
                                      });
  const double query = std::clamp(s.proxy_alpha * v, lo->delta_v, hi->delta_v);
  const double gain = -s.gp_I.predict_mean(query);
  if (gain <= s.gain_threshold) return Decision::follow(gain);

  if (v >= s.v_hi) return Decision::descend_to(s.ladder.finest(), gain);

  const double h_max = s.survey_altitude();
  const double h_min = altitude_at_gsd(s.camera, s.ladder.finest());
  const double h_target = std::clamp(h_max - s.gp_O.predict_mean(query), h_min, h_max);
  // Altitude is proportional to GSD, so the nearest altitude is the nearest GSD.
  const double target = s.ladder.snap(gsd_at_altitude(s.camera, h_target));
  if (target == s.ladder.survey()) return Decision::follow(gain);
  return Decision::descend_to(target, gain);
}

/// Appends an executed descent to O and refits its GP. Hyperparameters are
/// re-optimized every refit_period-th update; I is left untouched.
inline DecisionState record_and_adapt(DecisionState s, const Observation& obs) {
  s.set_O.push_back({obs.delta_v, obs.delta_h});
  ++s.updates_since_refit;
  Hyperparams hp = s.gp_O.fitted() ? s.gp_O.hyper() : s.default_hyper;
  if (s.updates_since_refit >= s.refit_period) {
    s.updates_since_refit = 0;
    if (s.optimize_hyperparams) {
      std::vector<double> x, y;
      for (const SamplePair& p : s.set_O) {
        x.push_back(p.delta_v);
        y.push_back(p.value);
      }
      hp = optimize_hyperparams(x, y, s.search, hp);
    }
  }
  std::vector<double> x, y;
  for (const SamplePair& p : s.set_O) {
    x.push_back(p.delta_v);
    y.push_back(p.value);
  }
  s.gp_O = GpModel::fit(std::move(x), std::move(y), hp);
  return s;
}

/// Linear ratio-to-GSD baseline: coarsest below v_lo, finest above v_hi,
/// interpolated in between and snapped to the ladder.
inline Decision decide_linear(double v, double v_lo, double v_hi, const GsdLadder& ladder) {
  if (v <= v_lo) return Decision::follow();
  if (v >= v_hi) {
    return ladder.size() > 1 ? Decision::descend_to(ladder.finest(), 0.0) : Decision::follow();
  }
  const double t = (v - v_lo) / (v_hi - v_lo);
  const double gsd = ladder.survey() + t * (ladder.finest() - ladder.survey());
  const double target = ladder.snap(gsd);
  if (target == ladder.survey()) return Decision::follow();
  return Decision::descend_to(target, 0.0);
}

}  // namespace msplan
