#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "camera.hpp"
#include "error.hpp"
#include "field.hpp"
#include "metrics.hpp"
#include "oracle.hpp"
#include "planner.hpp"
#include "region.hpp"

namespace msplan {

/// Point-to-point flight from rest to rest with bounded acceleration and speed,
/// plus a fixed cost per image.
struct TimeModel {
  double v_max = 5.0;
  double a_max = 2.0;
  double image_overhead_s = 5.0;

  void validate() const {
    if (!(v_max > 0.0) || !(a_max > 0.0) || !(image_overhead_s > 0.0)) {
      throw InvalidArgument("TimeModel: all parameters must be positive");
    }
  }
};

/// Trapezoidal profile if cruise speed is reached, triangular otherwise.
inline double leg_time(double d, const TimeModel& tm) {
  if (d < 0.0) throw InvalidArgument("leg_time: negative distance");
  if (d >= tm.v_max * tm.v_max / tm.a_max) return d / tm.v_max + tm.v_max / tm.a_max;
  return 2.0 * std::sqrt(d / tm.a_max);
}

enum class StrategyKind { fixed, non_adaptive, adaptive, linear };

struct Strategy {
  StrategyKind kind = StrategyKind::fixed;
  double gsd = 0.0;  // fixed only, m/px

  static Strategy fixed(double gsd) { return {StrategyKind::fixed, gsd}; }
  static Strategy non_adaptive() { return {StrategyKind::non_adaptive, 0.0}; }
  static Strategy adaptive() { return {StrategyKind::adaptive, 0.0}; }
  static Strategy linear() { return {StrategyKind::linear, 0.0}; }

  /// "fixed:<cm/px>", "non_adaptive", "adaptive" or "linear".
  static Strategy parse(const std::string& name) {
    if (name == "non_adaptive") return non_adaptive();
    if (name == "adaptive") return adaptive();
    if (name == "linear") return linear();
    if (name.rfind("fixed:", 0) == 0) {
      try {
        std::size_t used = 0;
        const double cm = std::stod(name.substr(6), &used);
        if (used == name.size() - 6 && cm > 0.0) return fixed(cm / 100.0);
      } catch (const std::exception&) {
      }
    }
    throw InvalidArgument("unknown strategy '" + name + "'");
  }

  std::string name() const {
    switch (kind) {
      case StrategyKind::non_adaptive: return "non_adaptive";
      case StrategyKind::adaptive: return "adaptive";
      case StrategyKind::linear: return "linear";
      case StrategyKind::fixed: break;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "fixed:%.1f", gsd * 100.0);
    return buf;
  }

  bool needs_state() const { return kind != StrategyKind::fixed; }

  friend bool operator==(const Strategy&, const Strategy&) = default;
};

struct FlyEvent {
  Point3 from;
  Point3 to;
  double seconds = 0.0;
};

struct ImageEvent {
  Waypoint waypoint;
  double vegetation_ratio = 0.0;
  std::optional<double> image_miou;
};

struct DecisionEvent {
  std::size_t region = 0;
  double vegetation_ratio = 0.0;
  Decision decision;
};

struct AdaptEvent {
  double delta_v = 0.0;
  double delta_h = 0.0;
};

using TraceEvent = std::variant<FlyEvent, ImageEvent, DecisionEvent, AdaptEvent>;

struct MissionTrace {
  std::string strategy;
  std::uint64_t seed = 0;
  std::vector<TraceEvent> events;
  double total_time_s = 0.0;
  std::size_t n_images = 0;
  std::size_t n_descents = 0;
  FusedMap fused;
  std::optional<SegStats> field_stats;
  std::optional<DecisionState> final_state;
};

/// Everything about a mission except the field, the strategy and the seed.
struct Scenario {
  CameraModel camera;
  GsdLadder ladder = GsdLadder::standard();
  OracleParams oracle;
  TimeModel time;
};

/// Total time recomputed from the event list alone.
inline double replay_time(const std::vector<TraceEvent>& events, const TimeModel& tm) {
  double t = 0.0;
  for (const TraceEvent& e : events) {
    if (const auto* f = std::get_if<FlyEvent>(&e)) {
      t += leg_time(distance(f->from, f->to), tm);
    } else if (std::holds_alternative<ImageEvent>(e)) {
      t += tm.image_overhead_s;
    }
  }
  return t;
}

namespace detail {

class MissionRecorder {
 public:
  MissionRecorder(const LabelGrid& field, const Scenario& sc, MissionTrace& trace)
      : field_(field), sc_(sc), trace_(trace) {}

  void fly_to(const Waypoint& wp) {
    if (!started_) {
      started_ = true;  // missions start above the first waypoint
      at_ = wp.position;
      return;
    }
    const double s = leg_time(distance(at_, wp.position), sc_.time);
    trace_.events.push_back(FlyEvent{at_, wp.position, s});
    trace_.total_time_s += s;
    at_ = wp.position;
  }

  void image(const Capture& c) {
    trace_.events.push_back(ImageEvent{c.waypoint, c.vegetation_ratio, c.image_miou});
    trace_.total_time_s += sc_.time.image_overhead_s;
    ++trace_.n_images;
    trace_.fused.fuse(upsample_to_base(c.image, field_.resolution()), c.waypoint.gsd, c.footprint);
  }

  Point2 position() const { return {at_.x, at_.y}; }

 private:
  const LabelGrid& field_;
  const Scenario& sc_;
  MissionTrace& trace_;
  Point3 at_{};
  bool started_ = false;
};

}  // namespace detail

/// Flies one mission over `field` (which also renders the images). With
/// `ground_truth` set, per-image and field-level mIoU are recorded.
inline MissionTrace run_mission(const LabelGrid& field, const Scenario& sc,
                                const Strategy& strategy,
                                const std::optional<DecisionState>& state, std::uint64_t seed,
                                bool ground_truth = true) {
  sc.camera.validate();
  sc.time.validate();
  check_lattice_alignment(sc.camera, sc.ladder, field.resolution());

  // A single-rung ladder leaves nothing to decide: every strategy is fixed.
  Strategy effective = strategy;
  if (strategy.kind != StrategyKind::fixed && sc.ladder.size() == 1) {
    effective = Strategy::fixed(sc.ladder.survey());
  }
  if (effective.kind == StrategyKind::fixed) {
    if (!sc.ladder.contains(effective.gsd)) {
      throw InvalidArgument("run_mission: fixed GSD is not a ladder rung");
    }
    if (!ground_truth) throw InvalidArgument("run_mission: fixed strategies need ground truth");
  } else if (!state) {
    throw InvalidArgument("run_mission: strategy '" + strategy.name() + "' needs a decision state");
  }

  MissionTrace trace;
  trace.strategy = strategy.name();
  trace.seed = seed;
  trace.fused = FusedMap(field);
  std::optional<DecisionState> current = state;

  OracleParams oracle = sc.oracle;
  oracle.seed = hash_combine(sc.oracle.seed, seed);
  detail::MissionRecorder rec(field, sc, trace);

  const double survey_gsd =
      effective.kind == StrategyKind::fixed ? effective.gsd : sc.ladder.survey();
  const auto grid = survey_grid(field.extent(), sc.camera, survey_gsd);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rec.fly_to(grid[i]);
    const Capture survey = capture(field, sc.camera, grid[i], oracle, ground_truth);
    rec.image(survey);
    if (effective.kind == StrategyKind::fixed) continue;

    const double v = survey.vegetation_ratio;
    const Decision d = effective.kind == StrategyKind::linear
                           ? decide_linear(v, current->v_lo, current->v_hi, sc.ladder)
                           : decide(*current, v);
    trace.events.push_back(DecisionEvent{i, v, d});
    if (d.action != Action::descend) continue;

    ++trace.n_descents;
    RegionComparison cmp = compare_region(field, sc.camera, survey, *d.target_gsd, oracle,
                                          ground_truth, rec.position());
    for (const Capture& child : cmp.children) {
      rec.fly_to(child.waypoint);
      rec.image(child);
    }
    if (effective.kind == StrategyKind::adaptive) {
      cmp.observation.region_id = i;
      cmp.observation.delta_miou.reset();  // no ground truth at run time
      current = record_and_adapt(std::move(*current), cmp.observation);
      trace.events.push_back(AdaptEvent{cmp.observation.delta_v, cmp.observation.delta_h});
    }
  }

  if (ground_truth) trace.field_stats = field_miou(trace.fused, field);
  trace.final_state = std::move(current);
  return trace;
}

// ---------------------------------------------------------------------------
// Strategy comparison

struct ComparisonRow {
  std::string strategy;
  std::uint64_t seed = 0;
  double field_miou = 0.0;
  double total_time_s = 0.0;
  std::size_t n_images = 0;
  std::size_t n_descents = 0;
  std::map<double, std::vector<double>> image_miou_by_gsd;
};

struct RungSummary {
  std::string strategy;
  double gsd = 0.0;
  double mean_miou = 0.0;
  double std_miou = 0.0;
  std::size_t n = 0;
};

inline ComparisonRow summarize(const MissionTrace& t) {
  ComparisonRow row{t.strategy, t.seed, t.field_stats ? t.field_stats->miou : 0.0,
                    t.total_time_s, t.n_images, t.n_descents, {}};
  for (const TraceEvent& e : t.events) {
    if (const auto* im = std::get_if<ImageEvent>(&e); im && im->image_miou) {
      row.image_miou_by_gsd[im->waypoint.gsd].push_back(*im->image_miou);
    }
  }
  return row;
}

/// One row per (strategy, seed), in strategy-list order then seed order. All
/// strategies of a seed see the same image noise wherever images coincide.
inline std::vector<ComparisonRow> compare_strategies(const LabelGrid& field, const Scenario& sc,
                                                     const std::vector<Strategy>& strategies,
                                                     const std::optional<DecisionState>& state,
                                                     const std::vector<std::uint64_t>& seeds) {
  std::vector<ComparisonRow> rows;
  for (const Strategy& s : strategies) {
    for (std::uint64_t seed : seeds) {
      rows.push_back(summarize(run_mission(field, sc, s, state, seed, true)));
    }
  }
  return rows;
}

/// Per-image mIoU mean and sample standard deviation grouped by (strategy, GSD).
inline std::vector<RungSummary> per_image_by_rung(const std::vector<ComparisonRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::vector<double>>> pooled;
  for (const ComparisonRow& r : rows) {
    if (!pooled.contains(r.strategy)) order.push_back(r.strategy);
    auto& dst = pooled[r.strategy];
    for (const auto& [g, v] : r.image_miou_by_gsd) dst[g].insert(dst[g].end(), v.begin(), v.end());
  }
  std::vector<RungSummary> out;
  for (const std::string& s : order) {
    const auto& by_gsd = pooled[s];
    for (auto it = by_gsd.rbegin(); it != by_gsd.rend(); ++it) {
      const auto& v = it->second;
      RungSummary sum{s, it->first, 0.0, 0.0, v.size()};
      for (double x : v) sum.mean_miou += x;
      sum.mean_miou /= static_cast<double>(v.size());
      if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - sum.mean_miou) * (x - sum.mean_miou);
        sum.std_miou = std::sqrt(ss / static_cast<double>(v.size() - 1));
      }
      out.push_back(sum);
    }
  }
  return out;
}

}  // namespace msplan
