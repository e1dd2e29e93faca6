#pragma once

// Experiment configuration and the command implementations behind the
// `msplan` executable. Commands write their files under the output directory
// and return a process exit code: 0 success, 1 usage error, 2 data/config error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "camera.hpp"
#include "error.hpp"
#include "field.hpp"
#include "io.hpp"
#include "oracle.hpp"
#include "planner.hpp"
#include "raster.hpp"
#include "sim.hpp"

namespace msplan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

inline constexpr const char* kOutputDirEnv = "MSPLAN_OUTPUT_DIR";

struct FieldEntry {
  std::string name;
  FieldSpec spec;
};

struct ExperimentConfig {
  CameraModel camera;
  GsdLadder ladder = GsdLadder::standard();
  OracleParams oracle;
  TimeModel time;
  std::vector<FieldEntry> fields;
  std::string training_field = "training";
  std::string testing_field = "testing";
  std::vector<std::string> strategies;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";
  PlannerParams planner;
  RasterEncoding encoding = RasterEncoding::binary;

  Scenario scenario() const { return {camera, ladder, oracle, time}; }

  /// A field name from `fields` maps to <output_dir>/<name>.pgm; anything else
  /// is taken as a raster path.
  std::filesystem::path field_path(const std::string& ref) const {
    for (const FieldEntry& f : fields) {
      if (f.name == ref) return output_dir / (f.name + ".pgm");
    }
    return ref;
  }

  std::filesystem::path state_path() const { return output_dir / "state.json"; }
};

/// Built-in experiment: 100x100 px camera (3 m footprint at 3 cm/px), a
/// training and a testing field of 18 m x 12 m with clustered weeds.
inline json default_config_json() {
  json fields = json::array();
  fields.push_back({{"name", "training"},
                    {"width_m", 18.0},
                    {"height_m", 12.0},
                    {"weed_cluster_count", 3},
                    {"seed", 11}});
  fields.push_back({{"name", "testing"},
                    {"width_m", 18.0},
                    {"height_m", 12.0},
                    {"weed_cluster_count", 3},
                    {"seed", 29}});
  json seeds = json::array();
  for (int s = 1; s <= 20; ++s) seeds.push_back(s);
  return {
      {"camera",
       {{"sensor_width_mm", 6.17},
        {"focal_length_mm", 3.6},
        {"image_width_px", 100},
        {"image_height_px", 100}}},
      {"ladder_cm_per_px", {3.0, 2.5, 2.0, 1.5, 1.0}},
      {"oracle", to_json(OracleParams{})},
      {"time_model", {{"v_max", 5.0}, {"a_max", 2.0}, {"image_overhead_s", 5.0}}},
      {"fields", fields},
      {"training_field", "training"},
      {"testing_field", "testing"},
      {"strategies",
       {"fixed:3.0", "fixed:2.5", "fixed:2.0", "fixed:1.5", "fixed:1.0", "non_adaptive", "adaptive",
        "linear"}},
      {"seeds", seeds},
      {"output_dir", "out"},
      {"decision",
       {{"v_lo_percentile", 25.0},
        {"v_hi_percentile", 90.0},
        {"gain_threshold", 0.0},
        {"refit_period", 5}}},
      {"raster_encoding", "binary"},
  };
}

inline FieldSpec field_spec_from_json(const json& j) {
  FieldSpec s;
  s.width_m = j.value("width_m", s.width_m);
  s.height_m = j.value("height_m", s.height_m);
  s.base_resolution = j.value("base_resolution", s.base_resolution);
  s.row_spacing_m = j.value("row_spacing_m", s.row_spacing_m);
  s.crop_radius_m = j.value("crop_radius_m", s.crop_radius_m);
  s.crop_jitter_m = j.value("crop_jitter_m", s.crop_jitter_m);
  s.plant_spacing_m = j.value("plant_spacing_m", s.plant_spacing_m);
  s.weed_cluster_count = j.value("weed_cluster_count", s.weed_cluster_count);
  s.weed_cluster_radius_m = j.value("weed_cluster_radius_m", s.weed_cluster_radius_m);
  s.weed_density = j.value("weed_density", s.weed_density);
  s.weed_radius_m = j.value("weed_radius_m", s.weed_radius_m);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

/// Applies "dotted.path=value" overrides; values parse as JSON, else as strings.
inline void apply_overrides(json& cfg, const std::vector<std::string>& overrides) {
  for (const std::string& o : overrides) {
    const std::size_t eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidArgument("override '" + o + "' is not of the form key=value");
    }
    json* node = &cfg;
    std::string path = o.substr(0, eq);
    std::size_t start = 0;
    for (;;) {
      const std::size_t dot = path.find('.', start);
      const std::string key = path.substr(start, dot - start);
      if (dot == std::string::npos) {
        json value = json::parse(o.substr(eq + 1), nullptr, false);
        (*node)[key] = value.is_discarded() ? json(o.substr(eq + 1)) : value;
        break;
      }
      node = &(*node)[key];
      start = dot + 1;
    }
  }
}

inline ExperimentConfig config_from_json(const json& j) {
  try {
    ExperimentConfig c;
    if (j.contains("camera")) c.camera = camera_from_json(j.at("camera"));
    if (j.contains("ladder_cm_per_px")) {
      c.ladder = GsdLadder::from_cm(j.at("ladder_cm_per_px").get<std::vector<double>>());
    }
    if (j.contains("oracle")) c.oracle = oracle_from_json(j.at("oracle"), c.ladder.survey());
    if (j.contains("time_model")) {
      const json& t = j.at("time_model");
      c.time.v_max = t.value("v_max", c.time.v_max);
      c.time.a_max = t.value("a_max", c.time.a_max);
      c.time.image_overhead_s = t.value("image_overhead_s", c.time.image_overhead_s);
      c.time.validate();
    }
    for (const json& f : j.value("fields", json::array())) {
      c.fields.push_back({f.at("name").get<std::string>(), field_spec_from_json(f)});
    }
    c.training_field = j.value("training_field", c.training_field);
    c.testing_field = j.value("testing_field", c.testing_field);
    c.strategies = j.value("strategies", std::vector<std::string>{});
    for (const std::string& s : c.strategies) Strategy::parse(s);
    c.seeds = j.value("seeds", c.seeds);
    if (c.seeds.empty()) throw InvalidArgument("config: seeds must not be empty");
    c.output_dir = j.value("output_dir", c.output_dir.string());
    if (j.contains("decision")) {
      const json& d = j.at("decision");
      PlannerParams& p = c.planner;
      p.v_lo_percentile = d.value("v_lo_percentile", p.v_lo_percentile);
      p.v_hi_percentile = d.value("v_hi_percentile", p.v_hi_percentile);
      if (d.contains("v_lo") && !d.at("v_lo").is_null()) p.v_lo = d.at("v_lo").get<double>();
      if (d.contains("v_hi") && !d.at("v_hi").is_null()) p.v_hi = d.at("v_hi").get<double>();
      p.gain_threshold = d.value("gain_threshold", p.gain_threshold);
      p.refit_period = d.value("refit_period", p.refit_period);
      p.optimize_hyperparams = d.value("optimize_hyperparams", p.optimize_hyperparams);
    }
    const std::string enc = j.value("raster_encoding", std::string("binary"));
    if (enc == "ascii") {
      c.encoding = RasterEncoding::ascii;
    } else if (enc != "binary") {
      throw InvalidArgument("config: raster_encoding must be 'ascii' or 'binary'");
    }
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

/// Reads `path` (or the built-in default when empty), applies overrides, then
/// the output-directory environment variable unless an override set it.
inline ExperimentConfig load_config(const std::filesystem::path& path,
                                    const std::vector<std::string>& overrides = {}) {
  json j = default_config_json();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config '" + path.string() + "'");
    j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw InvalidArgument("config '" + path.string() + "' is not valid JSON");
  }
  bool dir_overridden = false;
  for (const std::string& o : overrides) dir_overridden |= o.rfind("output_dir=", 0) == 0;
  if (!dir_overridden) {
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) j["output_dir"] = env;
  }
  apply_overrides(j, overrides);
  return config_from_json(j);
}

namespace detail {

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error("failed writing '" + p.string() + "'");
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("cannot create output directory '" + dir.string() + "'");
  }
}

/// Loaded state with the config's explicit decision overrides applied.
inline DecisionState load_state(const ExperimentConfig& cfg, const std::filesystem::path& p) {
  DecisionState s = parse_state(read_text(p));
  if (cfg.planner.v_lo) s.v_lo = *cfg.planner.v_lo;
  if (cfg.planner.v_hi) s.v_hi = *cfg.planner.v_hi;
  return s;
}

inline std::string file_token(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == '/') c = '_';
  }
  return s;
}

}  // namespace detail

inline int cmd_generate(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.fields.empty()) {
    err << "warning: no field specs in config; nothing to generate\n";
    return kExitOk;
  }
  detail::ensure_dir(cfg.output_dir);
  for (const FieldEntry& f : cfg.fields) {
    const auto path = cfg.field_path(f.name);
    const LabelGrid grid = generate_field(f.spec);
    write_raster(grid, path, cfg.encoding);
    out << f.name << ": " << grid.width() << "x" << grid.height() << " px, vegetation ratio "
        << vegetation_ratio(grid) << " -> " << path.string() << "\n";
  }
  return kExitOk;
}

inline int cmd_init(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const LabelGrid truth = read_raster(cfg.field_path(cfg.training_field));
  DecisionState s;
  try {
    s = initialize(truth, cfg.camera, cfg.ladder, cfg.oracle, cfg.planner);
  } catch (const DegenerateField& e) {
    err << "error: degenerate training field: " << e.what() << "\n";
    return kExitData;
  }
  detail::ensure_dir(cfg.output_dir);
  detail::write_text(cfg.state_path(), dump_state(s));
  auto hp = [](const Hyperparams& h) {
    std::ostringstream o;
    o << "length_scale=" << h.length_scale << " signal_variance=" << h.signal_variance
      << " noise_variance=" << h.noise_variance;
    return o.str();
  };
  out << "|O|=" << s.set_O.size() << " |I|=" << s.set_I.size() << "\n"
      << "gp_O: " << hp(s.gp_O.hyper()) << "\n"
      << "gp_I: " << hp(s.gp_I.hyper()) << "\n"
      << "v_lo=" << s.v_lo << " v_hi=" << s.v_hi << " proxy_alpha=" << s.proxy_alpha << "\n"
      << "state -> " << cfg.state_path().string() << "\n";
  return kExitOk;
}

struct RunOptions {
  std::string strategy;
  std::string field;       // name or path; testing field when empty
  std::string state;       // path; <output_dir>/state.json when empty
  std::optional<std::uint64_t> seed;
};

inline int cmd_run(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& out,
                   std::ostream& err) {
  const Strategy strategy = Strategy::parse(opt.strategy);
  const LabelGrid field = read_raster(cfg.field_path(opt.field.empty() ? cfg.testing_field : opt.field));
  std::optional<DecisionState> state;
  if (strategy.needs_state()) {
    const std::filesystem::path p = opt.state.empty() ? cfg.state_path() : std::filesystem::path(opt.state);
    if (!std::filesystem::exists(p)) {
      err << "error: strategy '" << strategy.name() << "' needs a decision state (" << p.string()
          << " not found; run `init` first)\n";
      return kExitData;
    }
    state = detail::load_state(cfg, p);
  }
  const std::uint64_t seed = opt.seed.value_or(cfg.seeds.front());
  const MissionTrace trace = run_mission(field, cfg.scenario(), strategy, state, seed, true);
  detail::ensure_dir(cfg.output_dir);
  const auto path = cfg.output_dir / ("trace_" + detail::file_token(strategy.name()) + "_" +
                                      std::to_string(seed) + ".jsonl");
  detail::write_text(path, serialize_trace(trace));
  out << msplan::detail::fmt_num(trace.field_stats ? trace.field_stats->miou : 0.0) << " "
      << msplan::detail::fmt_num(trace.total_time_s) << " " << trace.n_images << " " << trace.n_descents
      << "\n";
  return kExitOk;
}

struct CompareOutput {
  std::vector<ComparisonRow> rows;
  std::vector<RungSummary> per_image;
};

/// Runs every (strategy, seed) mission on the testing field and writes
/// compare.csv, accuracy_vs_time.csv and per_image.csv.
inline CompareOutput run_compare(const ExperimentConfig& cfg, const std::string& state_path = {}) {
  const LabelGrid field = read_raster(cfg.field_path(cfg.testing_field));
  std::vector<Strategy> strategies;
  bool need_state = false;
  for (const std::string& s : cfg.strategies) {
    strategies.push_back(Strategy::parse(s));
    need_state |= strategies.back().needs_state();
  }
  std::optional<DecisionState> state;
  if (need_state && cfg.ladder.size() > 1) {
    const std::filesystem::path p = state_path.empty() ? cfg.state_path() : std::filesystem::path(state_path);
    if (!std::filesystem::exists(p)) {
      throw InvalidArgument("compare: decision state " + p.string() + " not found; run `init` first");
    }
    state = detail::load_state(cfg, p);
  }
  CompareOutput res;
  res.rows = compare_strategies(field, cfg.scenario(), strategies, state, cfg.seeds);
  res.per_image = per_image_by_rung(res.rows);
  detail::ensure_dir(cfg.output_dir);
  detail::write_text(cfg.output_dir / "compare.csv", comparison_csv(res.rows));
  detail::write_text(cfg.output_dir / "accuracy_vs_time.csv", accuracy_vs_time_csv(res.rows));
  detail::write_text(cfg.output_dir / "per_image.csv", per_image_csv(res.per_image));
  return res;
}

inline int cmd_compare(const ExperimentConfig& cfg, std::ostream& out, std::ostream&,
                       const std::string& state_path = {}) {
  const CompareOutput res = run_compare(cfg, state_path);
  out << accuracy_vs_time_csv(res.rows);
  return kExitOk;
}

}  // namespace msplan::cli
