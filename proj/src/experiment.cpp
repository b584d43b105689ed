#include "irsgame/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include "irsgame/errors.hpp"

namespace irsgame {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Model assembly and simulation

ScenarioModel build_model(const ScenarioConfig& cfg) {
  validate(cfg);
  auto channels = generate_channels(cfg, cfg.seed);
  auto links = build_all_links(cfg, channels);
  UtilityModel utilities(cfg, links);
  return ScenarioModel{cfg, std::move(channels), std::move(links), std::move(utilities)};
}

namespace {

Trajectory run_dynamics(const ScenarioModel& model, double delta, const IntegratorSpec& spec,
                        bool force_delayed) {
  const auto& um = model.utilities;
  const double mu = model.cfg.mu;
  const UtilityObserver observe = [&um](const PopulationState& p) { return um(p); };
  const PopulationState p0(model.cfg.initial_population);
  if (delta == 0.0 && !force_delayed) {
    const VectorField field = [&](double t, const PopulationState& p) {
      return replicator_field(t, p, observe, mu);
    };
    return integrate_ode(field, observe, p0, spec);
  }
  const DelayedField field = [delta, mu](double t, const HistoryLookup& history) {
    return delayed_replicator_field(t, history, delta, mu);
  };
  return integrate_dde(field, observe, p0, delta, spec);
}

std::optional<EquilibriumResult> try_equilibrium(const ScenarioModel& model) {
  const auto traj = simulate(model, 0.0, model.cfg.integrator);
  const auto eq = detect_equilibrium(traj, model.cfg.equilibrium.eps_field, model.cfg.equilibrium.eps_mass);
  if (!eq) return std::nullopt;
  return EquilibriumResult{traj.states[eq->index], *eq};
}

}  // namespace

Trajectory simulate(const ScenarioModel& model, double delta, const IntegratorSpec& spec) {
  return run_dynamics(model, delta, spec, false);
}

EquilibriumResult solve_equilibrium(const ScenarioModel& model) {
  auto result = try_equilibrium(model);
  if (!result) {
    throw NonConvergenceError("no equilibrium within horizon " +
                              format_double(model.cfg.integrator.horizon));
  }
  return *result;
}

double sp_share(const ScenarioConfig& cfg, const PopulationState& p, int sp) {
  const auto services = cfg.services();
  if (services.size() != p.size()) throw ShapeError("sp_share: state length mismatch");
  double share = 0.0;
  for (std::size_t g = 0; g < services.size(); ++g) {
    if (services[g].sp == sp) share += p[g];
  }
  return share;
}

void place_users_behind_irs(ScenarioConfig& cfg, int sp, double d) {
  auto& s = cfg.sps.at(static_cast<std::size_t>(sp));
  if (!s.bs || !s.irs_position) throw ConfigError("sps[" + std::to_string(sp) + "]: geometry incomplete");
  const double len = distance(*s.bs, *s.irs_position);
  if (!(len > 0.0)) throw ConfigError("sps[" + std::to_string(sp) + "]: BS and IRS coincide");
  const double ux = (s.irs_position->x - s.bs->x) / len;
  const double uy = (s.irs_position->y - s.bs->y) / len;
  s.users = Position{s.irs_position->x + d * ux, s.irs_position->y + d * uy};
}

// ---------------------------------------------------------------------------
// Presets

std::string_view preset_name(PresetKind kind) {
  switch (kind) {
    case PresetKind::UtilitiesVsTime:
      return "utilities-vs-time";
    case PresetKind::ConvergenceSpeed:
      return "convergence-speed";
    case PresetKind::DelaySweep:
      return "delay-sweep";
    case PresetKind::IrsSizeSweep:
      return "irs-size-sweep";
    case PresetKind::DistancePriceSweep:
      return "distance-price-sweep";
  }
  return "unknown";
}

const std::vector<PresetKind>& all_presets() {
  static const std::vector<PresetKind> kinds{PresetKind::UtilitiesVsTime, PresetKind::ConvergenceSpeed,
                                             PresetKind::DelaySweep, PresetKind::IrsSizeSweep,
                                             PresetKind::DistancePriceSweep};
  return kinds;
}

PresetKind parse_preset(std::string_view name) {
  for (auto kind : all_presets()) {
    if (preset_name(kind) == name) return kind;
  }
  throw ConfigError("preset: unknown name '" + std::string(name) + "'");
}

namespace {

template <class T>
void require_increasing(const std::vector<T>& grid, const std::string& name) {
  if (grid.empty()) throw ConfigError(name + ": grid must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw ConfigError(name + ": grid must be strictly increasing");
  }
}

}  // namespace

void ExperimentPreset::validate() const {
  irsgame::validate(base);
  require_increasing(mu_grid, "mu_grid");
  if (mu_grid.front() <= 0.0) throw ConfigError("mu_grid: values must be > 0");
  require_increasing(n_users_grid, "n_users_grid");
  if (n_users_grid.front() < 1) throw ConfigError("n_users_grid: values must be >= 1");
  require_increasing(delay_factors, "delay_factors");
  if (delay_factors.front() < 0.0) throw ConfigError("delay_factors: values must be >= 0");
  require_increasing(irs2_sizes, "irs2_sizes");
  if (irs2_sizes.front() < 1) throw ConfigError("irs2_sizes: values must be >= 1");
  require_increasing(distances, "distances");
  if (distances.front() <= 0.0) throw ConfigError("distances: values must be > 0");
  require_increasing(sp1_irs_prices, "sp1_irs_prices");
  if (sp1_irs_prices.front() < 0.0) throw ConfigError("sp1_irs_prices: values must be >= 0");
  if (stride < 1) throw ConfigError("stride: must be >= 1");
  if ((kind == PresetKind::IrsSizeSweep || kind == PresetKind::DistancePriceSweep) && base.sps.size() < 2) {
    throw ConfigError("sps: this preset needs at least two service providers");
  }
}

ExperimentPreset make_preset(PresetKind kind, ScenarioConfig base) {
  ExperimentPreset preset;
  preset.kind = kind;
  preset.base = std::move(base);
  return preset;
}

// ---------------------------------------------------------------------------
// Output

std::string format_value(double value) {
  if (std::isnan(value)) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Trajectory decimate(const Trajectory& traj, std::size_t stride) {
  if (stride <= 1) return traj;
  Trajectory out;
  out.total_correction = traj.total_correction;
  out.max_correction = traj.max_correction;
  out.absorbed_mass = traj.absorbed_mass;
  out.extinctions = traj.extinctions;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i % stride == 0 || i + 1 == traj.size()) out.push(traj.times[i], traj.states[i], traj.utilities[i]);
  }
  return out;
}

namespace {

void write_header(std::ostream& os, const Metadata& meta) {
  for (const auto& [key, value] : meta) os << "# " << key << '=' << value << '\n';
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out << text;
  out.close();
  if (!out) throw IoError(path.string() + ": write failed");
}

std::string table_csv(const Metadata& meta, const std::vector<std::string>& columns,
                      const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  write_header(os, meta);
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
    os << '\n';
  }
  return os.str();
}

std::vector<std::string> trajectory_columns(std::size_t groups) {
  std::vector<std::string> cols{"t"};
  for (std::size_t g = 1; g <= groups; ++g) cols.push_back("p_" + std::to_string(g));
  for (std::size_t g = 1; g <= groups; ++g) cols.push_back("u_" + std::to_string(g));
  cols.push_back("ubar");
  return cols;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj, const Metadata& meta) {
  if (traj.empty()) throw DomainError("emit_csv: trajectory is empty");
  const std::size_t groups = traj.states.front().size();
  std::ostringstream os;
  write_header(os, meta);
  const auto cols = trajectory_columns(groups);
  for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
  os << '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_value(traj.times[i]);
    for (std::size_t g = 0; g < groups; ++g) os << ',' << format_value(traj.states[i][g]);
    const auto& u = traj.utilities[i];
    for (std::size_t g = 0; g < groups; ++g) {
      os << ',' << (g < u.u.size() ? format_value(u.u[g]) : std::string("NA"));
    }
    os << ',' << format_value(u.u_bar) << '\n';
  }
  return os.str();
}

void emit_csv(const Trajectory& traj, const Metadata& meta, const fs::path& path) {
  write_file(path, trajectory_csv(traj, meta));
}

std::string trajectory_json(const Trajectory& traj) {
  using nlohmann::json;
  if (traj.empty()) throw DomainError("trajectory_json: trajectory is empty");
  const std::size_t groups = traj.states.front().size();
  const auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json out = json::object();
  json t = json::array();
  for (double v : traj.times) t.push_back(v);
  out["t"] = std::move(t);
  for (std::size_t g = 0; g < groups; ++g) {
    json p = json::array();
    json u = json::array();
    for (std::size_t i = 0; i < traj.size(); ++i) {
      p.push_back(num(traj.states[i][g]));
      u.push_back(g < traj.utilities[i].u.size() ? num(traj.utilities[i].u[g]) : json(nullptr));
    }
    out["p_" + std::to_string(g + 1)] = std::move(p);
    out["u_" + std::to_string(g + 1)] = std::move(u);
  }
  json ubar = json::array();
  for (const auto& u : traj.utilities) ubar.push_back(num(u.u_bar));
  out["ubar"] = std::move(ubar);
  return out.dump();
}

// ---------------------------------------------------------------------------
// Experiment runner

namespace {

// Runs fn(0..n-1) on a small thread pool; results keep index order.
template <class R, class F>
std::vector<R> parallel_map(std::size_t n, F fn) {
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

Metadata base_metadata(PresetKind kind, const ScenarioConfig& cfg) {
  Metadata meta{{"generator", "irsgame"}, {"preset", std::string(preset_name(kind))}};
  for (auto& kv : flatten(cfg)) meta.push_back(std::move(kv));
  return meta;
}

double tail_amplitude(const Trajectory& traj, std::size_t group, double fraction) {
  const std::size_t start = static_cast<std::size_t>(static_cast<double>(traj.size()) * (1.0 - fraction));
  double lo = traj.states[start][group];
  double hi = lo;
  for (std::size_t i = start; i < traj.size(); ++i) {
    lo = std::min(lo, traj.states[i][group]);
    hi = std::max(hi, traj.states[i][group]);
  }
  return hi - lo;
}

std::string shares_label(const ScenarioConfig& cfg, const PopulationState& p, int sp) {
  return sp < static_cast<int>(cfg.sps.size()) ? format_value(sp_share(cfg, p, sp)) : "NA";
}

void run_utilities_vs_time(const ExperimentPreset& preset, const fs::path& dir, ExperimentOutput& out) {
  const auto model = build_model(preset.base);
  const auto traj = simulate(model);
  auto meta = base_metadata(preset.kind, preset.base);
  const auto eq = detect_equilibrium(traj, preset.base.equilibrium.eps_field, preset.base.equilibrium.eps_mass);
  meta.emplace_back("t_equilibrium", eq ? format_value(eq->time) : "NA");
  meta.emplace_back("utility_spread", eq ? format_value(eq->utility_spread) : "NA");
  meta.emplace_back("extinctions", std::to_string(traj.extinctions.size()));
  if (!eq) {
    out.all_converged = false;
    out.warnings.push_back("utilities-vs-time: no equilibrium within the horizon");
  }
  const auto path = dir / "utilities_vs_time.csv";
  emit_csv(decimate(traj, preset.stride), meta, path);
  out.files.push_back(path);
  if (preset.json) {
    const auto jpath = dir / "utilities_vs_time.json";
    write_file(jpath, trajectory_json(decimate(traj, preset.stride)));
    out.files.push_back(jpath);
  }
}

void run_convergence_speed(const ExperimentPreset& preset, const fs::path& dir, ExperimentOutput& out) {
  struct Point {
    double mu;
    int n_users;
  };
  std::vector<Point> points;
  for (double mu : preset.mu_grid) {
    for (int n : preset.n_users_grid) points.push_back({mu, n});
  }
  const auto times = parallel_map<std::optional<double>>(points.size(), [&](std::size_t i) {
    auto cfg = preset.base;
    cfg.mu = points[i].mu;
    cfg.n_users = points[i].n_users;
    const auto eq = try_equilibrium(build_model(cfg));
    return eq ? std::optional<double>(eq->equilibrium.time) : std::nullopt;
  });
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!times[i]) out.all_converged = false;
    rows.push_back({format_value(points[i].mu), std::to_string(points[i].n_users),
                    times[i] ? format_value(*times[i]) : "NA"});
  }
  if (!out.all_converged) out.warnings.push_back("convergence-speed: some grid points did not converge");
  const auto path = dir / "convergence_speed.csv";
  write_file(path, table_csv(base_metadata(preset.kind, preset.base), {"mu", "n_users", "t_equilibrium"}, rows));
  out.files.push_back(path);
}

void run_delay_sweep(const ExperimentPreset& preset, const fs::path& dir, ExperimentOutput& out) {
  const auto model = build_model(preset.base);
  auto meta = base_metadata(preset.kind, preset.base);
  double reference = 0.0;
  try {
    reference = stability_bound(model.cfg, model.links);
    meta.emplace_back("stability_bound", format_value(reference));
    meta.emplace_back("delay_reference", "stability_bound");
  } catch (const UnsupportedSettingError& e) {
    out.warnings.push_back(std::string("delay-sweep: ") + e.what() + "; bound omitted");
    const auto u0 = model.utilities(PopulationState(model.cfg.initial_population));
    if (!(u0.u_bar > 0.0)) throw DomainError("delay-sweep: average utility must be positive");
    reference = std::numbers::pi / (2.0 * model.cfg.mu * u0.u_bar);
    meta.emplace_back("stability_bound", "omitted");
    meta.emplace_back("warning", "closed-form bound needs one service per SP");
    meta.emplace_back("delay_reference", "pi/(2*mu*ubar)=" + format_value(reference));
  }

  const auto trajs = parallel_map<Trajectory>(preset.delay_factors.size(), [&](std::size_t i) {
    return run_dynamics(model, preset.delay_factors[i] * reference, preset.base.integrator, true);
  });

  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    const double delta = preset.delay_factors[i] * reference;
    const auto& traj = trajs[i];
    const auto eq = detect_equilibrium(traj, preset.base.equilibrium.eps_field, preset.base.equilibrium.eps_mass);
    auto tmeta = meta;
    tmeta.emplace_back("delay_factor", format_value(preset.delay_factors[i]));
    tmeta.emplace_back("delay", format_value(delta));
    tmeta.emplace_back("t_equilibrium", eq ? format_value(eq->time) : "NA");
    const auto path = dir / ("delay_sweep_" + std::to_string(i) + ".csv");
    emit_csv(decimate(traj, preset.stride), tmeta, path);
    out.files.push_back(path);
    if (preset.json) {
      const auto jpath = dir / ("delay_sweep_" + std::to_string(i) + ".json");
      write_file(jpath, trajectory_json(decimate(traj, preset.stride)));
      out.files.push_back(jpath);
    }
    rows.push_back({format_value(preset.delay_factors[i]), format_value(delta), eq ? "1" : "0",
                    eq ? format_value(eq->time) : "NA", format_value(traj.states.back()[0]),
                    format_value(tail_amplitude(traj, 0, 0.1))});
  }
  const auto path = dir / "delay_sweep_summary.csv";
  write_file(path, table_csv(meta, {"delay_factor", "delay", "equilibrium_reached", "t_equilibrium",
                                    "p_1_final", "p_1_tail_amplitude"},
                             rows));
  out.files.push_back(path);
}

void run_irs_size_sweep(const ExperimentPreset& preset, const fs::path& dir, ExperimentOutput& out) {
  const int modules = preset.base.sps[1].irs.modules;
  for (int k : preset.irs2_sizes) {
    if (k % modules != 0) {
      throw ConfigError("irs2_sizes: " + std::to_string(k) + " not divisible by sps[1].irs.modules");
    }
  }
  const auto results = parallel_map<std::optional<EquilibriumResult>>(preset.irs2_sizes.size(), [&](std::size_t i) {
    auto cfg = preset.base;
    const int k = preset.irs2_sizes[i];
    cfg.sps[1].irs = {k, modules, k / modules};
    return try_equilibrium(build_model(cfg));
  });
  const std::size_t groups = preset.base.group_count();
  std::vector<std::string> cols{"k2"};
  for (std::size_t g = 1; g <= groups; ++g) cols.push_back("p_" + std::to_string(g));
  cols.insert(cols.end(), {"sp1_share", "sp2_share", "t_equilibrium"});
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::vector<std::string> row{std::to_string(preset.irs2_sizes[i])};
    if (results[i]) {
      const auto& p = results[i]->state;
      for (std::size_t g = 0; g < groups; ++g) row.push_back(format_value(p[g]));
      row.push_back(shares_label(preset.base, p, 0));
      row.push_back(shares_label(preset.base, p, 1));
      row.push_back(format_value(results[i]->equilibrium.time));
    } else {
      out.all_converged = false;
      row.insert(row.end(), groups + 3, "NA");
    }
    rows.push_back(std::move(row));
  }
  if (!out.all_converged) out.warnings.push_back("irs-size-sweep: some sizes did not converge");
  const auto path = dir / "irs_size_sweep.csv";
  write_file(path, table_csv(base_metadata(preset.kind, preset.base), cols, rows));
  out.files.push_back(path);
}

void run_distance_price_sweep(const ExperimentPreset& preset, const fs::path& dir, ExperimentOutput& out) {
  struct Point {
    double distance;
    double price;
  };
  std::vector<Point> points;
  for (double d : preset.distances) {
    for (double price : preset.sp1_irs_prices) points.push_back({d, price});
  }
  const auto results = parallel_map<std::optional<EquilibriumResult>>(points.size(), [&](std::size_t i) {
    auto cfg = preset.base;
    place_users_behind_irs(cfg, 0, points[i].distance);
    cfg.sps[0].price_irs = points[i].price;
    return try_equilibrium(build_model(cfg));
  });
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> row{format_value(points[i].distance), format_value(points[i].price)};
    if (results[i]) {
      row.push_back(shares_label(preset.base, results[i]->state, 0));
      row.push_back(shares_label(preset.base, results[i]->state, 1));
    } else {
      out.all_converged = false;
      row.insert(row.end(), {"NA", "NA"});
    }
    rows.push_back(std::move(row));
  }
  if (!out.all_converged) out.warnings.push_back("distance-price-sweep: some points did not converge");
  const auto path = dir / "distance_price_sweep.csv";
  write_file(path, table_csv(base_metadata(preset.kind, preset.base),
                             {"distance", "gamma1_irs", "sp1_share", "sp2_share"}, rows));
  out.files.push_back(path);
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentPreset& preset, const fs::path& out_dir) {
  preset.validate();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string() + ": " + ec.message());

  ExperimentOutput out;
  switch (preset.kind) {
    case PresetKind::UtilitiesVsTime:
      run_utilities_vs_time(preset, out_dir, out);
      break;
    case PresetKind::ConvergenceSpeed:
      run_convergence_speed(preset, out_dir, out);
      break;
    case PresetKind::DelaySweep:
      run_delay_sweep(preset, out_dir, out);
      break;
    case PresetKind::IrsSizeSweep:
      run_irs_size_sweep(preset, out_dir, out);
      break;
    case PresetKind::DistancePriceSweep:
      run_distance_price_sweep(preset, out_dir, out);
      break;
  }
  return out;
}

}  // namespace irsgame
