#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msplan/cli.hpp"

int main(int argc, char** argv) {
  using namespace msplan;
  CLI::App app{"Adaptive multi-resolution aerial survey simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::string output_dir;
  app.add_option("-c,--config", config_path, "Experiment config (JSON); built-in default if omitted");
  app.add_option("--set", overrides, "Override a config value: dotted.key=value (repeatable)");
  app.add_option("-o,--output-dir", output_dir,
                 std::string("Output directory (overrides config and $") + cli::kOutputDirEnv + ")");

  auto* generate = app.add_subcommand("generate", "Write the configured synthetic field rasters");
  auto* init = app.add_subcommand("init", "Initialize the decision state on the training field");

  cli::RunOptions run_opt;
  std::uint64_t run_seed = 0;
  auto* run = app.add_subcommand("run", "Fly one mission and write its trace");
  run->add_option("--strategy", run_opt.strategy,
                  "fixed:<cm/px> | non_adaptive | adaptive | linear")
      ->required();
  run->add_option("--field", run_opt.field, "Field name from the config or raster path");
  run->add_option("--state", run_opt.state, "Decision state file");
  auto* seed_opt = run->add_option("--seed", run_seed, "Mission seed (default: first config seed)");

  std::string compare_state;
  auto* compare = app.add_subcommand("compare", "Run the strategy x seed matrix and emit CSV data");
  compare->add_option("--state", compare_state, "Decision state file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (!output_dir.empty()) overrides.push_back("output_dir=\"" + output_dir + "\"");
    const cli::ExperimentConfig cfg = cli::load_config(config_path, overrides);
    if (*generate) return cli::cmd_generate(cfg, std::cout, std::cerr);
    if (*init) return cli::cmd_init(cfg, std::cout, std::cerr);
    if (*run) {
      if (*seed_opt) run_opt.seed = run_seed;
      return cli::cmd_run(cfg, run_opt, std::cout, std::cerr);
    }
    if (*compare) return cli::cmd_compare(cfg, std::cout, std::cerr, compare_state);
  } catch (const msplan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::kExitData;
  }
  return cli::kExitUsage;
}
