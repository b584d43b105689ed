#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "irsgame/channel.hpp"
#include "irsgame/config.hpp"
#include "irsgame/errors.hpp"
#include "irsgame/experiment.hpp"
#include "irsgame/game.hpp"

namespace py = pybind11;
using namespace irsgame;

namespace {

py::exception<Error>* base = nullptr;
py::exception<ConfigError>* config_error = nullptr;
py::exception<NumericError>* numeric_error = nullptr;
py::exception<NonConvergenceError>* nonconvergence = nullptr;
py::exception<UnsupportedSettingError>* unsupported = nullptr;

py::array_t<double> matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  py::array_t<double> out({rows.size(), cols});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) view(i, j) = j < rows[i].size() ? rows[i][j] : NAN;
  }
  return out;
}

py::dict trajectory_dict(const Trajectory& traj) {
  const std::size_t groups = traj.empty() ? 0 : traj.states.front().size();
  std::vector<std::vector<double>> p, u;
  std::vector<double> ubar;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    p.push_back(traj.states[i].raw());
    u.push_back(traj.utilities[i].u);
    ubar.push_back(traj.utilities[i].u_bar);
  }
  py::dict d;
  d["t"] = py::array_t<double>(traj.times.size(), traj.times.data());
  d["p"] = matrix(p, groups);
  d["u"] = matrix(u, groups);
  d["ubar"] = py::array_t<double>(ubar.size(), ubar.data());
  d["max_correction"] = traj.max_correction;
  py::list ext;
  for (const auto& e : traj.extinctions) ext.append(py::make_tuple(e.time, e.group));
  d["extinctions"] = ext;
  return d;
}

py::object equilibrium_dict(const std::optional<Equilibrium>& eq) {
  if (!eq) return py::none();
  py::dict d;
  d["time"] = eq->time;
  d["index"] = eq->index;
  d["utility_spread"] = eq->utility_spread;
  d["surviving"] = eq->surviving;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Replicator-dynamics service selection in IRS-assisted networks";

  // Leaked on purpose: the exception types must outlive module teardown.
  base = new py::exception<Error>(m, "Error");
  config_error = new py::exception<ConfigError>(m, "ConfigError", base->ptr());
  numeric_error = new py::exception<NumericError>(m, "NumericError", base->ptr());
  nonconvergence = new py::exception<NonConvergenceError>(m, "NonConvergenceError", base->ptr());
  unsupported = new py::exception<UnsupportedSettingError>(m, "UnsupportedSettingError", base->ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(*config_error, e.what());
    } catch (const IoError& e) {
      py::set_error(PyExc_OSError, e.what());
    } catch (const NumericError& e) {
      py::set_error(*numeric_error, e.what());
    } catch (const NonConvergenceError& e) {
      py::set_error(*nonconvergence, e.what());
    } catch (const UnsupportedSettingError& e) {
      py::set_error(*unsupported, e.what());
    } catch (const DomainError& e) {
      py::set_error(PyExc_ValueError, e.what());
    } catch (const Error& e) {
      py::set_error(*base, e.what());
    }
  });

  py::class_<ScenarioConfig>(m, "Config")
      .def_static("default", &default_scenario, "The two-SP evaluation scenario")
      .def_static("reduced", &reduced_scenario, "Two SPs with one service each")
      .def_static("load", [](const std::string& path) { return load_config(path); }, py::arg("path"))
      .def_static("parse", &parse_config, py::arg("text"))
      .def_readwrite("n_users", &ScenarioConfig::n_users)
      .def_readwrite("mu", &ScenarioConfig::mu)
      .def_readwrite("delta", &ScenarioConfig::delta)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_property(
          "dt", [](const ScenarioConfig& c) { return c.integrator.dt; },
          [](ScenarioConfig& c, double v) { c.integrator.dt = v; })
      .def_property(
          "horizon", [](const ScenarioConfig& c) { return c.integrator.horizon; },
          [](ScenarioConfig& c, double v) { c.integrator.horizon = v; })
      .def_readwrite("initial_population", &ScenarioConfig::initial_population)
      .def_property_readonly("groups", &ScenarioConfig::group_count)
      .def("validate", [](ScenarioConfig& c) { resolve(c); })
      .def("to_yaml", &emit_config)
      .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; });

  m.def("path_loss_linear", [](double d, double alpha) { return path_loss_linear(d, alpha, PathLossModel{}); },
        py::arg("d"), py::arg("alpha"));

  m.def(
      "link_snrs",
      [](const ScenarioConfig& cfg) {
        std::vector<double> snr;
        for (const auto& link : build_model(cfg).links) snr.push_back(link.snr);
        return snr;
      },
      py::arg("config"), "Optimized SNR of every service group");

  m.def(
      "net_values",
      [](const ScenarioConfig& cfg) {
        const auto model = build_model(cfg);
        std::vector<double> c;
        for (std::size_t g = 0; g < model.utilities.groups(); ++g) c.push_back(model.utilities.net_value(g));
        return c;
      },
      py::arg("config"), "p_g N u_g per group (independent of the state)");

  m.def(
      "simulate",
      [](const ScenarioConfig& cfg, std::optional<double> delta) {
        ScenarioModel model = build_model(cfg);
        Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = simulate(model, delta.value_or(cfg.delta), cfg.integrator);
        }
        auto d = trajectory_dict(traj);
        d["equilibrium"] = equilibrium_dict(detect_equilibrium(traj, cfg.equilibrium.eps_field, cfg.equilibrium.eps_mass));
        return d;
      },
      py::arg("config"), py::arg("delta") = py::none(),
      "Integrate the (delayed) replicator dynamics; returns t, p, u, ubar and the detected equilibrium");

  m.def(
      "equilibrium",
      [](const ScenarioConfig& cfg) {
        const auto result = solve_equilibrium(build_model(cfg));
        py::dict d = equilibrium_dict(result.equilibrium);
        d["state"] = result.state.raw();
        return d;
      },
      py::arg("config"));

  m.def(
      "stability_bound",
      [](const ScenarioConfig& cfg) {
        const auto model = build_model(cfg);
        return stability_bound(model.cfg, model.links);
      },
      py::arg("config"));

  m.def("presets", [] {
    std::vector<std::string> names;
    for (auto kind : all_presets()) names.emplace_back(preset_name(kind));
    return names;
  });

  m.def(
      "run_experiment",
      [](const std::string& preset, const ScenarioConfig& cfg, const std::string& out_dir, bool json) {
        auto p = make_preset(parse_preset(preset), cfg);
        p.json = json;
        ExperimentOutput out;
        {
          py::gil_scoped_release release;
          out = run_experiment(p, out_dir);
        }
        py::dict d;
        std::vector<std::string> files;
        for (const auto& f : out.files) files.push_back(f.string());
        d["files"] = files;
        d["warnings"] = out.warnings;
        d["all_converged"] = out.all_converged;
        return d;
      },
      py::arg("preset"), py::arg("config"), py::arg("out_dir"), py::arg("json") = false);
}
