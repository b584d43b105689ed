#include "irsgame/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "irsgame/errors.hpp"
#include "irsgame/units.hpp"

namespace irsgame {

double distance(const Position& a, const Position& b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// Scenario structure

std::size_t ScenarioConfig::group_count() const {
  std::size_t g = 0;
  for (const auto& sp : sps) {
    g += static_cast<std::size_t>(std::max(sp.irs.modules, 0)) * sp.power_levels_dbm.size();
  }
  return g;
}

std::vector<ServiceIndex> ScenarioConfig::services() const {
  std::vector<ServiceIndex> out;
  out.reserve(group_count());
  for (int m = 0; m < static_cast<int>(sps.size()); ++m) {
    for (int k = 0; k < sps[m].irs.modules; ++k) {
      for (int j = 0; j < static_cast<int>(sps[m].power_levels_dbm.size()); ++j) {
        out.push_back({m, k, j});
      }
    }
  }
  return out;
}

std::size_t ScenarioConfig::flat_index(const ServiceIndex& s) const {
  if (s.sp < 0 || s.sp >= static_cast<int>(sps.size())) {
    throw DomainError("service index: sp out of range");
  }
  const auto& sp = sps[s.sp];
  const int levels = static_cast<int>(sp.power_levels_dbm.size());
  if (s.subset < 0 || s.subset >= sp.irs.modules || s.power_level < 0 || s.power_level >= levels) {
    throw DomainError("service index: subset or power level out of range");
  }
  std::size_t g = 0;
  for (int m = 0; m < s.sp; ++m) {
    g += static_cast<std::size_t>(sps[m].irs.modules) * sps[m].power_levels_dbm.size();
  }
  return g + static_cast<std::size_t>(s.subset * levels + s.power_level);
}

double ScenarioConfig::noise_psd_watt() const { return dbm_to_watt(noise_psd_dbm_hz); }

ScenarioConfig default_scenario() {
  ScenarioConfig cfg;
  SpConfig sp1;
  sp1.power_levels_dbm = {15.0, 30.0};
  sp1.irs = {8, 2, 4};
  sp1.bs = Position{0.0, 0.0};
  sp1.irs_position = Position{50.0, 0.0};
  sp1.users = Position{60.0, 0.0};

  SpConfig sp2;
  sp2.power_levels_dbm = {10.0, 20.0};
  sp2.irs = {8, 1, 8};
  sp2.bs = Position{200.0, 0.0};
  sp2.irs_position = Position{150.0, 0.0};
  sp2.users = Position{140.0, 0.0};

  cfg.sps = {sp1, sp2};
  cfg.integrator.horizon = 400.0;
  resolve(cfg);
  return cfg;
}

ScenarioConfig reduced_scenario() {
  ScenarioConfig cfg = default_scenario();
  cfg.sps[0].power_levels_dbm = {30.0};
  cfg.sps[0].irs = {8, 1, 8};
  cfg.sps[1].power_levels_dbm = {20.0};
  cfg.valuations.clear();
  cfg.initial_population.clear();
  resolve(cfg);
  return cfg;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

std::string sp_path(std::size_t m) { return "sps[" + std::to_string(m) + "]"; }

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError(field + ": " + what);
}

void require_position(const std::optional<Position>& p, const std::string& field) {
  require(p.has_value(), field, "missing (geometry incomplete)");
  require(std::isfinite(p->x) && std::isfinite(p->y), field, "coordinates must be finite");
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
  require(!cfg.sps.empty(), "sps", "at least one service provider is required");
  for (std::size_t m = 0; m < cfg.sps.size(); ++m) {
    const auto& sp = cfg.sps[m];
    const auto path = sp_path(m);
    require(sp.antennas >= 1, path + ".antennas", "must be >= 1");
    require(sp.bandwidth_hz > 0.0 && std::isfinite(sp.bandwidth_hz), path + ".bandwidth_hz",
            "must be > 0");
    require(!sp.power_levels_dbm.empty(), path + ".power_levels_dbm", "at least one level");
    for (std::size_t j = 0; j < sp.power_levels_dbm.size(); ++j) {
      require(std::isfinite(sp.power_levels_dbm[j]), path + ".power_levels_dbm", "must be finite");
      if (j > 0) {
        require(sp.power_levels_dbm[j] > sp.power_levels_dbm[j - 1], path + ".power_levels_dbm",
                "power levels must be strictly ascending (J_1 < J_2 < ...)");
      }
    }
    require(sp.price_irs >= 0.0, path + ".price_irs", "must be >= 0");
    require(sp.price_power >= 0.0, path + ".price_power", "must be >= 0");
    require(sp.irs.elements >= 1, path + ".irs.elements", "must be >= 1");
    require(sp.irs.modules >= 1, path + ".irs.modules", "must be >= 1");
    require(sp.irs.elements_per_module >= 1, path + ".irs.elements_per_module", "must be >= 1");
    require(sp.irs.elements == sp.irs.modules * sp.irs.elements_per_module, path + ".irs",
            "invariant K = Q * E violated (elements=" + std::to_string(sp.irs.elements) +
                ", modules=" + std::to_string(sp.irs.modules) +
                ", elements_per_module=" + std::to_string(sp.irs.elements_per_module) + ")");
    require_position(sp.bs, path + ".bs");
    require_position(sp.irs_position, path + ".irs_position");
    require_position(sp.users, path + ".users");
  }
  require(cfg.n_users >= 1, "n_users", "must be >= 1");
  require(cfg.mu > 0.0 && std::isfinite(cfg.mu), "mu", "must be > 0");
  require(cfg.delta >= 0.0 && std::isfinite(cfg.delta), "delta", "must be >= 0");
  require(std::isfinite(cfg.noise_psd_dbm_hz), "noise_psd_dbm_hz", "must be finite");
  require(cfg.path_loss.d0 > 0.0, "path_loss.d0", "must be > 0");
  require(cfg.path_loss.alpha_direct >= 0.0, "path_loss.alpha_direct", "must be >= 0");
  require(cfg.path_loss.alpha_bs_irs >= 0.0, "path_loss.alpha_bs_irs", "must be >= 0");
  require(cfg.path_loss.alpha_irs_user >= 0.0, "path_loss.alpha_irs_user", "must be >= 0");
  cfg.integrator.validate();
  require(cfg.optimizer.tol > 0.0, "optimizer.tol", "must be > 0");
  require(cfg.optimizer.max_iters >= 1, "optimizer.max_iters", "must be >= 1");
  require(cfg.equilibrium.eps_field > 0.0, "equilibrium.eps_field", "must be > 0");
  require(cfg.equilibrium.eps_mass >= 0.0, "equilibrium.eps_mass", "must be >= 0");

  const std::size_t groups = cfg.group_count();
  require(cfg.valuations.size() == groups, "valuations",
          "expected " + std::to_string(groups) + " entries (one per service group)");
  for (double v : cfg.valuations) require(v >= 0.0 && std::isfinite(v), "valuations", "must be >= 0");
  require(cfg.initial_population.size() == groups, "initial_population",
          "expected " + std::to_string(groups) + " entries (one per service group)");
  require(PopulationState(cfg.initial_population).on_simplex(1e-9), "initial_population",
          "must be non-negative and sum to 1");
}

void resolve(ScenarioConfig& cfg) {
  const std::size_t groups = cfg.group_count();
  if (cfg.valuations.empty()) cfg.valuations.assign(groups, kDefaultValuation);
  if (cfg.initial_population.empty() && groups > 0) {
    cfg.initial_population = PopulationState::uniform(groups).raw();
  }
  validate(cfg);
}

// ---------------------------------------------------------------------------
// YAML reading

namespace {

class Reader {
public:
  Reader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.IsMap()) throw ConfigError(path_label() + "expected a mapping");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const YAML::Node child = node_[key];
    if (!child) return;
    out = convert<T>(child, field(key));
  }

  template <class T>
  void read_required(const char* key, T& out) {
    if (!node_[key]) throw ConfigError(field(key) + ": missing");
    read(key, out);
  }

  void read_position(const char* key, std::optional<Position>& out) {
    seen_.insert(key);
    const YAML::Node child = node_[key];
    if (!child) return;
    if (!child.IsSequence() || child.size() != 2) {
      throw ConfigError(field(key) + ": expected [x, y]");
    }
    out = Position{convert<double>(child[0], field(key) + "[0]"),
                   convert<double>(child[1], field(key) + "[1]")};
  }

  YAML::Node child(const char* key) {
    seen_.insert(key);
    return node_[key];
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void reject_unknown() const {
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(field(key) + ": unknown key");
    }
  }

  template <class T>
  static T convert(const YAML::Node& n, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, std::vector<double>>) {
        if (!n.IsSequence()) throw ConfigError(where + ": expected a list of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(n[i].as<double>());
        return out;
      } else {
        if (!n.IsScalar()) throw ConfigError(where + ": expected a scalar");
        return n.as<T>();
      }
    } catch (const YAML::Exception&) {
      throw ConfigError(where + ": cannot convert '" + YAML::Dump(n) + "'");
    }
  }

private:
  std::string path_label() const { return path_.empty() ? "" : path_ + ": "; }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

SpConfig read_sp(const YAML::Node& node, const std::string& path) {
  Reader r(node, path);
  SpConfig sp;
  r.read("antennas", sp.antennas);
  r.read("bandwidth_hz", sp.bandwidth_hz);
  r.read_required("power_levels_dbm", sp.power_levels_dbm);
  r.read("price_irs", sp.price_irs);
  r.read("price_power", sp.price_power);
  const YAML::Node irs = r.child("irs");
  if (!irs) throw ConfigError(path + ".irs: missing");
  Reader ir(irs, path + ".irs");
  ir.read_required("elements", sp.irs.elements);
  sp.irs.modules = 1;
  ir.read("modules", sp.irs.modules);
  if (irs["elements_per_module"]) {
    ir.read("elements_per_module", sp.irs.elements_per_module);
  } else {
    if (sp.irs.modules < 1 || sp.irs.elements % sp.irs.modules != 0) {
      throw ConfigError(path + ".irs: invariant K = Q * E violated (elements=" +
                        std::to_string(sp.irs.elements) + " not divisible by modules=" +
                        std::to_string(sp.irs.modules) + ")");
    }
    sp.irs.elements_per_module = sp.irs.elements / sp.irs.modules;
  }
  ir.reject_unknown();
  r.read_position("bs", sp.bs);
  r.read_position("irs_position", sp.irs_position);
  r.read_position("users", sp.users);
  r.reject_unknown();
  return sp;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  if (!root || root.IsNull()) throw ConfigError("parse error: empty document");

  ScenarioConfig cfg;
  Reader r(root, "");
  r.read("seed", cfg.seed);
  r.read("n_users", cfg.n_users);
  r.read("mu", cfg.mu);
  r.read("delta", cfg.delta);
  r.read("noise_psd_dbm_hz", cfg.noise_psd_dbm_hz);
  double valuation = kDefaultValuation;
  r.read("valuation", valuation);
  r.read("valuations", cfg.valuations);
  r.read("initial_population", cfg.initial_population);

  if (const auto pl = r.child("path_loss")) {
    Reader pr(pl, "path_loss");
    pr.read("pl0_db", cfg.path_loss.pl0_db);
    pr.read("d0", cfg.path_loss.d0);
    pr.read("alpha_direct", cfg.path_loss.alpha_direct);
    pr.read("alpha_bs_irs", cfg.path_loss.alpha_bs_irs);
    pr.read("alpha_irs_user", cfg.path_loss.alpha_irs_user);
    pr.reject_unknown();
  }
  if (const auto in = r.child("integrator")) {
    Reader ir(in, "integrator");
    std::string method = to_string(cfg.integrator.method);
    ir.read("method", method);
    cfg.integrator.method = parse_integration_method(method);
    ir.read("dt", cfg.integrator.dt);
    ir.read("horizon", cfg.integrator.horizon);
    ir.read("renormalize", cfg.integrator.renormalize);
    ir.read("max_correction", cfg.integrator.max_correction);
    ir.reject_unknown();
  }
  if (const auto op = r.child("optimizer")) {
    Reader orr(op, "optimizer");
    orr.read("tol", cfg.optimizer.tol);
    orr.read("max_iters", cfg.optimizer.max_iters);
    orr.reject_unknown();
  }
  if (const auto eq = r.child("equilibrium")) {
    Reader er(eq, "equilibrium");
    er.read("eps_field", cfg.equilibrium.eps_field);
    er.read("eps_mass", cfg.equilibrium.eps_mass);
    er.reject_unknown();
  }
  const auto sps = r.child("sps");
  if (!sps || !sps.IsSequence()) throw ConfigError("sps: missing or not a list");
  for (std::size_t m = 0; m < sps.size(); ++m) cfg.sps.push_back(read_sp(sps[m], sp_path(m)));
  r.reject_unknown();

  if (cfg.valuations.empty()) cfg.valuations.assign(cfg.group_count(), valuation);
  resolve(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

// ---------------------------------------------------------------------------
// YAML writing

namespace {

void emit_list(YAML::Emitter& out, const std::vector<double>& values) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double v : values) out << format_double(v);
  out << YAML::EndSeq;
}

void emit_position(YAML::Emitter& out, const char* key, const std::optional<Position>& p) {
  if (!p) return;
  out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq << format_double(p->x)
      << format_double(p->y) << YAML::EndSeq;
}

}  // namespace

std::string emit_config(const ScenarioConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "seed" << YAML::Value << cfg.seed;
  out << YAML::Key << "n_users" << YAML::Value << cfg.n_users;
  out << YAML::Key << "mu" << YAML::Value << format_double(cfg.mu);
  out << YAML::Key << "delta" << YAML::Value << format_double(cfg.delta);
  out << YAML::Key << "noise_psd_dbm_hz" << YAML::Value << format_double(cfg.noise_psd_dbm_hz);
  out << YAML::Key << "valuations" << YAML::Value;
  emit_list(out, cfg.valuations);
  out << YAML::Key << "initial_population" << YAML::Value;
  emit_list(out, cfg.initial_population);

  const auto& pl = cfg.path_loss;
  out << YAML::Key << "path_loss" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pl0_db" << YAML::Value << format_double(pl.pl0_db);
  out << YAML::Key << "d0" << YAML::Value << format_double(pl.d0);
  out << YAML::Key << "alpha_direct" << YAML::Value << format_double(pl.alpha_direct);
  out << YAML::Key << "alpha_bs_irs" << YAML::Value << format_double(pl.alpha_bs_irs);
  out << YAML::Key << "alpha_irs_user" << YAML::Value << format_double(pl.alpha_irs_user);
  out << YAML::EndMap;

  const auto& in = cfg.integrator;
  out << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << to_string(in.method);
  out << YAML::Key << "dt" << YAML::Value << format_double(in.dt);
  out << YAML::Key << "horizon" << YAML::Value << format_double(in.horizon);
  out << YAML::Key << "renormalize" << YAML::Value << in.renormalize;
  out << YAML::Key << "max_correction" << YAML::Value << format_double(in.max_correction);
  out << YAML::EndMap;

  out << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "tol" << YAML::Value << format_double(cfg.optimizer.tol);
  out << YAML::Key << "max_iters" << YAML::Value << cfg.optimizer.max_iters;
  out << YAML::EndMap;

  out << YAML::Key << "equilibrium" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps_field" << YAML::Value << format_double(cfg.equilibrium.eps_field);
  out << YAML::Key << "eps_mass" << YAML::Value << format_double(cfg.equilibrium.eps_mass);
  out << YAML::EndMap;

  out << YAML::Key << "sps" << YAML::Value << YAML::BeginSeq;
  for (const auto& sp : cfg.sps) {
    out << YAML::BeginMap;
    out << YAML::Key << "antennas" << YAML::Value << sp.antennas;
    out << YAML::Key << "bandwidth_hz" << YAML::Value << format_double(sp.bandwidth_hz);
    out << YAML::Key << "power_levels_dbm" << YAML::Value;
    emit_list(out, sp.power_levels_dbm);
    out << YAML::Key << "price_irs" << YAML::Value << format_double(sp.price_irs);
    out << YAML::Key << "price_power" << YAML::Value << format_double(sp.price_power);
    out << YAML::Key << "irs" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "elements" << YAML::Value << sp.irs.elements;
    out << YAML::Key << "modules" << YAML::Value << sp.irs.modules;
    out << YAML::Key << "elements_per_module" << YAML::Value << sp.irs.elements_per_module;
    out << YAML::EndMap;
    emit_position(out, "bs", sp.bs);
    emit_position(out, "irs_position", sp.irs_position);
    emit_position(out, "users", sp.users);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::vector<std::pair<std::string, std::string>> flatten(const ScenarioConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  const auto join = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
  };
  const auto pos = [](const std::optional<Position>& p) {
    return p ? format_double(p->x) + "," + format_double(p->y) : std::string("unset");
  };
  kv.emplace_back("seed", std::to_string(cfg.seed));
  kv.emplace_back("n_users", std::to_string(cfg.n_users));
  kv.emplace_back("groups", std::to_string(cfg.group_count()));
  kv.emplace_back("mu", format_double(cfg.mu));
  kv.emplace_back("delta", format_double(cfg.delta));
  kv.emplace_back("noise_psd_dbm_hz", format_double(cfg.noise_psd_dbm_hz));
  kv.emplace_back("valuations", join(cfg.valuations));
  kv.emplace_back("initial_population", join(cfg.initial_population));
  kv.emplace_back("path_loss.pl0_db", format_double(cfg.path_loss.pl0_db));
  kv.emplace_back("path_loss.d0", format_double(cfg.path_loss.d0));
  kv.emplace_back("path_loss.alpha_direct", format_double(cfg.path_loss.alpha_direct));
  kv.emplace_back("path_loss.alpha_bs_irs", format_double(cfg.path_loss.alpha_bs_irs));
  kv.emplace_back("path_loss.alpha_irs_user", format_double(cfg.path_loss.alpha_irs_user));
  kv.emplace_back("integrator.method", to_string(cfg.integrator.method));
  kv.emplace_back("integrator.dt", format_double(cfg.integrator.dt));
  kv.emplace_back("integrator.horizon", format_double(cfg.integrator.horizon));
  kv.emplace_back("integrator.renormalize", cfg.integrator.renormalize ? "true" : "false");
  kv.emplace_back("integrator.max_correction", format_double(cfg.integrator.max_correction));
  kv.emplace_back("optimizer.tol", format_double(cfg.optimizer.tol));
  kv.emplace_back("optimizer.max_iters", std::to_string(cfg.optimizer.max_iters));
  kv.emplace_back("equilibrium.eps_field", format_double(cfg.equilibrium.eps_field));
  kv.emplace_back("equilibrium.eps_mass", format_double(cfg.equilibrium.eps_mass));
  for (std::size_t m = 0; m < cfg.sps.size(); ++m) {
    const auto& sp = cfg.sps[m];
    const auto p = "sp" + std::to_string(m + 1) + ".";
    kv.emplace_back(p + "antennas", std::to_string(sp.antennas));
    kv.emplace_back(p + "bandwidth_hz", format_double(sp.bandwidth_hz));
    kv.emplace_back(p + "power_levels_dbm", join(sp.power_levels_dbm));
    kv.emplace_back(p + "price_irs", format_double(sp.price_irs));
    kv.emplace_back(p + "price_power", format_double(sp.price_power));
    kv.emplace_back(p + "irs.elements", std::to_string(sp.irs.elements));
    kv.emplace_back(p + "irs.modules", std::to_string(sp.irs.modules));
    kv.emplace_back(p + "irs.elements_per_module", std::to_string(sp.irs.elements_per_module));
    kv.emplace_back(p + "bs", pos(sp.bs));
    kv.emplace_back(p + "irs_position", pos(sp.irs_position));
    kv.emplace_back(p + "users", pos(sp.users));
  }
  return kv;
}

}  // namespace irsgame
