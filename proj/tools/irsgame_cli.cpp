// irsgame: run experiment presets, validate configs, print the delay bound.
//
// Exit codes: 0 success, 1 configuration/IO error, 2 numeric error,
// 3 no equilibrium where one was required.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "irsgame/config.hpp"
#include "irsgame/errors.hpp"
#include "irsgame/experiment.hpp"
#include "irsgame/game.hpp"

using namespace irsgame;

namespace {

struct RunOptions {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<double> mu;
  std::optional<double> delta;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<int> n_users;
  bool json = false;
};

ScenarioConfig base_config(const std::string& path) {
  return path.empty() ? default_scenario() : load_config(path);
}

int run(const RunOptions& opt) {
  auto cfg = base_config(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.mu) cfg.mu = *opt.mu;
  if (opt.delta) cfg.delta = *opt.delta;
  if (opt.dt) cfg.integrator.dt = *opt.dt;
  if (opt.horizon) cfg.integrator.horizon = *opt.horizon;
  if (opt.n_users) cfg.n_users = *opt.n_users;
  resolve(cfg);

  auto preset = make_preset(parse_preset(opt.preset), cfg);
  preset.json = opt.json;
  const auto out = run_experiment(preset, opt.out);
  for (const auto& w : out.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& f : out.files) std::cout << f.string() << '\n';
  return out.all_converged ? 0 : 3;
}

int validate(const std::string& path) {
  const auto cfg = load_config(path);
  std::cout << emit_config(cfg);
  return 0;
}

int bound(const std::string& path) {
  const auto model = build_model(load_config(path));
  std::printf("%.17g\n", stability_bound(model.cfg, model.links));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Service selection in IRS-assisted networks via replicator dynamics"};
  app.require_subcommand(1);

  RunOptions opt;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment preset and write CSV files");
  std::string presets;
  for (auto kind : all_presets()) presets += (presets.empty() ? "" : ", ") + std::string(preset_name(kind));
  run_cmd->add_option("preset", opt.preset, "One of: " + presets)->required();
  run_cmd->add_option("--config", opt.config, "Scenario file (default: built-in evaluation scenario)");
  run_cmd->add_option("--seed", opt.seed, "Channel seed");
  run_cmd->add_option("--out", opt.out, "Output directory")->capture_default_str();
  run_cmd->add_option("--mu", opt.mu, "Learning rate");
  run_cmd->add_option("--delta", opt.delta, "Information delay");
  run_cmd->add_option("--dt", opt.dt, "Integration step");
  run_cmd->add_option("--horizon", opt.horizon, "Integration horizon");
  run_cmd->add_option("--n-users", opt.n_users, "Number of users");
  run_cmd->add_flag("--json", opt.json, "Also write JSON trajectory dumps");

  std::string path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file and print it resolved");
  validate_cmd->add_option("config", path, "Scenario file")->required();
  auto* bound_cmd = app.add_subcommand("bound", "Print the critical information delay");
  bound_cmd->add_option("config", path, "Scenario file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return run(opt);
    if (*validate_cmd) return validate(path);
    if (*bound_cmd) return bound(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
