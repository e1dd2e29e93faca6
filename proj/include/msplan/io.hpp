#pragma once

// JSON documents: decision state, mission traces (JSON Lines) and comparison
// tables (CSV).

#include <cstdint>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "camera.hpp"
#include "error.hpp"
#include "gp.hpp"
#include "oracle.hpp"
#include "planner.hpp"
#include "sim.hpp"

namespace msplan {

using json = nlohmann::json;

inline constexpr const char* kStateFormat = "msplan.decision_state/1";

inline json to_json(const CameraModel& c) {
  return {{"sensor_width_mm", c.sensor_width_mm},
          {"focal_length_mm", c.focal_length_mm},
          {"image_width_px", c.image_width_px},
          {"image_height_px", c.image_height_px}};
}

inline CameraModel camera_from_json(const json& j) {
  CameraModel c;
  c.sensor_width_mm = j.value("sensor_width_mm", c.sensor_width_mm);
  c.focal_length_mm = j.value("focal_length_mm", c.focal_length_mm);
  c.image_width_px = j.value("image_width_px", c.image_width_px);
  c.image_height_px = j.value("image_height_px", c.image_height_px);
  c.validate();
  return c;
}

inline json to_json(const Hyperparams& h) {
  return {{"length_scale", h.length_scale},
          {"signal_variance", h.signal_variance},
          {"noise_variance", h.noise_variance}};
}

inline Hyperparams hyper_from_json(const json& j) {
  Hyperparams h;
  h.length_scale = j.value("length_scale", h.length_scale);
  h.signal_variance = j.value("signal_variance", h.signal_variance);
  h.noise_variance = j.value("noise_variance", h.noise_variance);
  h.validate();
  return h;
}

inline json to_json(const SearchSpace& s) {
  return {{"length_scales", s.length_scales},
          {"signal_variances", s.signal_variances},
          {"noise_variances", s.noise_variances}};
}

inline SearchSpace search_from_json(const json& j) {
  SearchSpace s;
  j.at("length_scales").get_to(s.length_scales);
  j.at("signal_variances").get_to(s.signal_variances);
  j.at("noise_variances").get_to(s.noise_variances);
  return s;
}

/// Training data and hyperparameters; the factorization is not stored.
inline json to_json(const GpModel& m) {
  return {{"inputs", m.inputs()}, {"targets", m.targets()}, {"hyper", to_json(m.hyper())}};
}

inline GpModel gp_from_json(const json& j) {
  return GpModel::fit(j.at("inputs").get<std::vector<double>>(),
                      j.at("targets").get<std::vector<double>>(), hyper_from_json(j.at("hyper")));
}

inline json to_json(const OracleParams& p) {
  return {{"base_error", p.base_error}, {"error_slope", p.error_slope},
          {"error_cap", p.error_cap},   {"gsd_ref", p.gsd_ref},
          {"confusion", p.confusion},   {"seed", p.seed}};
}

inline OracleParams oracle_from_json(const json& j, double gsd_max) {
  OracleParams p;
  if (j.contains("base_error")) j.at("base_error").get_to(p.base_error);
  if (j.contains("error_slope")) j.at("error_slope").get_to(p.error_slope);
  if (j.contains("confusion")) j.at("confusion").get_to(p.confusion);
  p.error_cap = j.value("error_cap", p.error_cap);
  p.gsd_ref = j.value("gsd_ref", p.gsd_ref);
  p.seed = j.value("seed", p.seed);
  p.validate(gsd_max);
  return p;
}

namespace detail {

inline json pairs_to_json(const std::vector<SamplePair>& v) {
  json a = json::array();
  for (const SamplePair& p : v) a.push_back({p.delta_v, p.value});
  return a;
}

inline std::vector<SamplePair> pairs_from_json(const json& a) {
  std::vector<SamplePair> v;
  for (const json& e : a) v.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return v;
}

inline std::vector<double> column(const std::vector<SamplePair>& v, bool first) {
  std::vector<double> out;
  for (const SamplePair& p : v) out.push_back(first ? p.delta_v : p.value);
  return out;
}

}  // namespace detail

inline json to_json(const DecisionState& s) {
  return {{"format", kStateFormat},
          {"camera", to_json(s.camera)},
          {"ladder_m_per_px", s.ladder.rungs()},
          {"set_O", detail::pairs_to_json(s.set_O)},
          {"set_I", detail::pairs_to_json(s.set_I)},
          {"hyper_O", to_json(s.gp_O.hyper())},
          {"hyper_I", to_json(s.gp_I.hyper())},
          {"v_lo", s.v_lo},
          {"v_hi", s.v_hi},
          {"proxy_alpha", s.proxy_alpha},
          {"gain_threshold", s.gain_threshold},
          {"refit_period", s.refit_period},
          {"updates_since_refit", s.updates_since_refit},
          {"optimize_hyperparams", s.optimize_hyperparams},
          {"default_hyper", to_json(s.default_hyper)},
          {"search_space", to_json(s.search)}};
}

/// Rebuilds a state; both GPs are refitted from the stored sets.
inline DecisionState state_from_json(const json& j) {
  if (j.value("format", std::string{}) != kStateFormat) {
    throw InvalidArgument("decision state: unsupported or missing format tag");
  }
  DecisionState s;
  s.camera = camera_from_json(j.at("camera"));
  s.ladder = GsdLadder(j.at("ladder_m_per_px").get<std::vector<double>>());
  s.set_O = detail::pairs_from_json(j.at("set_O"));
  s.set_I = detail::pairs_from_json(j.at("set_I"));
  s.v_lo = j.at("v_lo").get<double>();
  s.v_hi = j.at("v_hi").get<double>();
  s.proxy_alpha = j.at("proxy_alpha").get<double>();
  s.gain_threshold = j.at("gain_threshold").get<double>();
  s.refit_period = j.at("refit_period").get<std::size_t>();
  s.updates_since_refit = j.at("updates_since_refit").get<std::size_t>();
  s.optimize_hyperparams = j.at("optimize_hyperparams").get<bool>();
  s.default_hyper = hyper_from_json(j.at("default_hyper"));
  s.search = search_from_json(j.at("search_space"));
  if (!(s.v_lo >= 0.0 && s.v_lo < s.v_hi && s.v_hi <= 1.0)) {
    throw InvalidArgument("decision state: need 0 <= v_lo < v_hi <= 1");
  }
  if (!s.set_O.empty()) {
    s.gp_O = GpModel::fit(detail::column(s.set_O, true), detail::column(s.set_O, false),
                          hyper_from_json(j.at("hyper_O")));
  }
  if (!s.set_I.empty()) {
    s.gp_I = GpModel::fit(detail::column(s.set_I, true), detail::column(s.set_I, false),
                          hyper_from_json(j.at("hyper_I")));
  }
  return s;
}

inline std::string dump_state(const DecisionState& s) { return to_json(s).dump(2) + "\n"; }

inline DecisionState parse_state(const std::string& text) {
  try {
    return state_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("decision state: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Mission traces: one JSON object per line.

namespace detail {

inline json point_json(const Point3& p) { return json::array({p.x, p.y, p.z}); }

inline const char* action_name(Action a) {
  return a == Action::descend ? "descend" : "continue";
}

struct EventJson {
  json operator()(const FlyEvent& e) const {
    return {{"record", "fly"}, {"from", point_json(e.from)}, {"to", point_json(e.to)},
            {"seconds", e.seconds}};
  }
  json operator()(const ImageEvent& e) const {
    json j = {{"record", "image"},
              {"position", point_json(e.waypoint.position)},
              {"gsd", e.waypoint.gsd},
              {"level", e.waypoint.level == WaypointLevel::survey ? "survey" : "inspect"},
              {"v", e.vegetation_ratio}};
    j["image_miou"] = e.image_miou ? json(*e.image_miou) : json(nullptr);
    return j;
  }
  json operator()(const DecisionEvent& e) const {
    json j = {{"record", "decision"},
              {"region", e.region},
              {"v", e.vegetation_ratio},
              {"action", action_name(e.decision.action)},
              {"predicted_gain", e.decision.predicted_gain}};
    j["target_gsd"] = e.decision.target_gsd ? json(*e.decision.target_gsd) : json(nullptr);
    return j;
  }
  json operator()(const AdaptEvent& e) const {
    return {{"record", "adapt"}, {"delta_v", e.delta_v}, {"delta_h", e.delta_h}};
  }
};

}  // namespace detail

inline std::string serialize_trace(const MissionTrace& t) {
  std::string out;
  out += json{{"record", "mission"}, {"strategy", t.strategy}, {"seed", t.seed}}.dump() + "\n";
  for (const TraceEvent& e : t.events) out += std::visit(detail::EventJson{}, e).dump() + "\n";
  json summary = {{"record", "summary"},
                  {"total_time_s", t.total_time_s},
                  {"n_images", t.n_images},
                  {"n_descents", t.n_descents}};
  if (t.field_stats) {
    summary["field_miou"] = t.field_stats->miou;
    json iou = json::array();
    for (const auto& v : t.field_stats->iou) iou.push_back(v ? json(*v) : json(nullptr));
    summary["class_iou"] = iou;
  } else {
    summary["field_miou"] = nullptr;
  }
  out += summary.dump() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// CSV tables

inline constexpr const char* kComparisonHeader =
    "strategy,seed,field_miou,total_time_s,n_images,n_descents";

namespace detail {
inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace detail

inline std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = std::string(kComparisonHeader) + "\n";
  for (const ComparisonRow& r : rows) {
    out += r.strategy + "," + std::to_string(r.seed) + "," + detail::fmt_num(r.field_miou) + "," +
           detail::fmt_num(r.total_time_s) + "," + std::to_string(r.n_images) + "," +
           std::to_string(r.n_descents) + "\n";
  }
  return out;
}

/// Accuracy-vs-time points averaged over seeds, one line per strategy.
inline std::string accuracy_vs_time_csv(const std::vector<ComparisonRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ComparisonRow*>> by;
  for (const ComparisonRow& r : rows) {
    if (!by.contains(r.strategy)) order.push_back(r.strategy);
    by[r.strategy].push_back(&r);
  }
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
  };
  std::string out = "strategy,mean_time_s,std_time_s,mean_field_miou,std_field_miou,n\n";
  for (const std::string& s : order) {
    std::vector<double> t, m;
    for (const ComparisonRow* r : by[s]) {
      t.push_back(r->total_time_s);
      m.push_back(r->field_miou);
    }
    auto [tm, ts] = mean_std(t);
    auto [mm, ms] = mean_std(m);
    out += s + "," + detail::fmt_num(tm) + "," + detail::fmt_num(ts) + "," + detail::fmt_num(mm) +
           "," + detail::fmt_num(ms) + "," + std::to_string(t.size()) + "\n";
  }
  return out;
}

inline std::string per_image_csv(const std::vector<RungSummary>& sums) {
  std::string out = "strategy,gsd_cm_per_px,mean_miou,std_miou,n\n";
  for (const RungSummary& s : sums) {
    out += s.strategy + "," + detail::fmt_num(s.gsd * 100.0) + "," + detail::fmt_num(s.mean_miou) +
           "," + detail::fmt_num(s.std_miou) + "," + std::to_string(s.n) + "\n";
  }
  return out;
}

}  // namespace msplan
