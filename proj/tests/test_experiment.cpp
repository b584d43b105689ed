#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "irsgame/errors.hpp"
#include "irsgame/experiment.hpp"

using namespace irsgame;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("irsgame-test-" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

Trajectory small_trajectory() {
  Trajectory traj;
  traj.push(0.0, PopulationState({0.5, 0.5}), {{2.0, 1.0}, 1.5});
  traj.push(0.1, PopulationState({0.6, 0.4}), {{2.0, 1.0}, 1.6});
  traj.push(0.2, PopulationState({1.0, 0.0}), {{2.0, NAN}, 2.0});
  return traj;
}

// Small grids keep the sweeps quick.
ExperimentPreset quick(PresetKind kind) {
  auto preset = make_preset(kind, default_scenario());
  preset.mu_grid = {0.2, 0.4};
  preset.n_users_grid = {50, 100};
  preset.irs2_sizes = {8, 16};
  preset.distances = {20, 60};
  preset.sp1_irs_prices = {0.1, 1.0};
  preset.delay_factors = {0.0, 0.5};
  preset.base.integrator.horizon = 100;
  preset.stride = 50;
  return preset;
}

}  // namespace

TEST_CASE("trajectory CSV shape") {
  const auto text = trajectory_csv(small_trajectory(), {{"seed", "42"}, {"mu", "0.1"}});
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "# seed=42");
  CHECK(lines[1] == "# mu=0.1");
  CHECK(lines[2] == "t,p_1,p_2,u_1,u_2,ubar");
  CHECK(lines[3] == "0,0.5,0.5,2,1,1.5");
  CHECK(lines[4] == "0.10000000000000001,0.59999999999999998,0.40000000000000002,2,1,1.6000000000000001");
  CHECK(lines[5] == "0.20000000000000001,1,0,2,NA,2");
}

TEST_CASE("values print with 17 significant digits") {
  CHECK(format_value(1.0 / 3.0) == "0.33333333333333331");
  CHECK(std::stod(format_value(0.1)) == 0.1);
  CHECK(format_value(NAN) == "NA");
}

TEST_CASE("emit_csv refuses empty trajectories and unwritable paths") {
  const auto dir = scratch("emit");
  fs::create_directories(dir);
  CHECK_THROWS_AS(emit_csv(Trajectory{}, {}, dir / "x.csv"), DomainError);
  CHECK_THROWS_AS(emit_csv(small_trajectory(), {}, dir / "missing" / "x.csv"), IoError);
  emit_csv(small_trajectory(), {{"k", "v"}}, dir / "a.csv");
  emit_csv(small_trajectory(), {{"k", "v"}}, dir / "b.csv");
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  fs::remove_all(dir);
}

TEST_CASE("JSON trajectory dump keys arrays by column") {
  const auto j = nlohmann::json::parse(trajectory_json(small_trajectory()));
  CHECK(j["t"].size() == 3);
  CHECK(j["p_1"][1].get<double>() == 0.6);
  CHECK(j["u_2"][2].is_null());
  CHECK(j["ubar"][2].get<double>() == 2.0);
}

TEST_CASE("decimation keeps every stride-th sample and the last") {
  Trajectory traj;
  for (int i = 0; i < 11; ++i) traj.push(i, PopulationState({1.0}), {{1.0}, 1.0});
  const auto d = decimate(traj, 4);
  CHECK(d.times == std::vector<double>{0, 4, 8, 10});
  CHECK(decimate(traj, 1).size() == 11);
}

TEST_CASE("preset names round-trip") {
  CHECK(all_presets().size() == 5);
  for (auto kind : all_presets()) CHECK(parse_preset(preset_name(kind)) == kind);
  CHECK(preset_name(PresetKind::IrsSizeSweep) == "irs-size-sweep");
  CHECK_THROWS_AS(parse_preset("fig2"), ConfigError);
}

TEST_CASE("preset grids must be non-empty and strictly increasing") {
  auto preset = make_preset(PresetKind::ConvergenceSpeed, default_scenario());
  CHECK_NOTHROW(preset.validate());
  preset.mu_grid = {};
  CHECK_THROWS_AS(preset.validate(), ConfigError);
  preset = make_preset(PresetKind::ConvergenceSpeed, default_scenario());
  preset.n_users_grid = {100, 50};
  CHECK_THROWS_AS(preset.validate(), ConfigError);
  preset = make_preset(PresetKind::DistancePriceSweep, default_scenario());
  preset.distances = {10, 10};
  CHECK_THROWS_AS(preset.validate(), ConfigError);
}

TEST_CASE("SP shares and user placement") {
  const auto cfg = default_scenario();
  const PopulationState p({0.1, 0.1, 0.1, 0.1, 0.3, 0.3});
  CHECK(sp_share(cfg, p, 0) == doctest::Approx(0.4));
  CHECK(sp_share(cfg, p, 1) == doctest::Approx(0.6));
  auto moved = cfg;
  place_users_behind_irs(moved, 0, 30.0);
  CHECK(moved.sps[0].users->x == doctest::Approx(80.0));
  CHECK(moved.sps[0].users->y == doctest::Approx(0.0));
  place_users_behind_irs(moved, 1, 30.0);
  CHECK(moved.sps[1].users->x == doctest::Approx(120.0));
}

TEST_CASE("every preset writes its files with the resolved config header") {
  for (auto kind : all_presets()) {
    CAPTURE(preset_name(kind));
    auto preset = quick(kind);
    if (kind == PresetKind::DelaySweep) preset.base = reduced_scenario();
    const auto dir = scratch(std::string(preset_name(kind)));
    const auto out = run_experiment(preset, dir);
    REQUIRE_FALSE(out.files.empty());
    for (const auto& f : out.files) {
      const auto text = slurp(f);
      CHECK(text.find("# seed=42\n") != std::string::npos);
      CHECK(text.find("# preset=" + std::string(preset_name(kind)) + "\n") != std::string::npos);
      CHECK(text.find("# sp1.price_irs=") != std::string::npos);
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("equal seeds give byte-identical outputs") {
  auto preset = quick(PresetKind::UtilitiesVsTime);
  preset.json = true;
  const auto a = run_experiment(preset, scratch("det-a"));
  const auto b = run_experiment(preset, scratch("det-b"));
  REQUIRE(a.files.size() == 2);
  REQUIRE(b.files.size() == 2);
  for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(slurp(a.files[i]) == slurp(b.files[i]));

  preset.base.seed = 7;
  const auto c = run_experiment(preset, scratch("det-c"));
  CHECK(slurp(a.files[0]) != slurp(c.files[0]));
  for (const auto* name : {"det-a", "det-b", "det-c"}) fs::remove_all(scratch(name));
}

TEST_CASE("delay sweep on a general scenario omits the bound with a warning") {
  auto preset = quick(PresetKind::DelaySweep);
  const auto dir = scratch("delay-general");
  const auto out = run_experiment(preset, dir);
  REQUIRE_FALSE(out.warnings.empty());
  CHECK(out.warnings[0].find("bound omitted") != std::string::npos);
  CHECK(slurp(dir / "delay_sweep_summary.csv").find("# stability_bound=omitted") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("a horizon too short to settle is reported as non-convergence") {
  auto preset = quick(PresetKind::UtilitiesVsTime);
  preset.base.integrator.horizon = 1.0;
  const auto dir = scratch("short");
  const auto out = run_experiment(preset, dir);
  CHECK_FALSE(out.all_converged);
  CHECK(slurp(dir / "utilities_vs_time.csv").find("# t_equilibrium=NA") != std::string::npos);
  const auto model = build_model(preset.base);
  CHECK_THROWS_AS(solve_equilibrium(model), NonConvergenceError);
  fs::remove_all(dir);
}
