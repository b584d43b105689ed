#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace irsgame {

/// Proportions p_g of the user population in each service group.
/// Lives on the probability simplex: p_g >= 0, sum = 1.
class PopulationState {
public:
  PopulationState() = default;
  explicit PopulationState(std::vector<double> p) : p_(std::move(p)) {}

  /// 1/G in every coordinate.
  static PopulationState uniform(std::size_t groups);

  std::size_t size() const noexcept { return p_.size(); }
  double operator[](std::size_t g) const { return p_[g]; }
  double& operator[](std::size_t g) { return p_[g]; }
  std::span<const double> values() const noexcept { return p_; }
  std::vector<double>& raw() noexcept { return p_; }
  const std::vector<double>& raw() const noexcept { return p_; }

  double sum() const noexcept;
  /// Non-negative and summing to one within `tol`.
  bool on_simplex(double tol = 1e-9) const noexcept;

  friend bool operator==(const PopulationState&, const PopulationState&) = default;

private:
  std::vector<double> p_;
};

/// Per-group utilities plus the population average. Groups with zero mass
/// have no defined utility and carry a quiet NaN.
struct UtilityVector {
  std::vector<double> u;
  double u_bar = 0.0;

  static bool not_applicable(double value) noexcept { return value != value; }
};

/// Information observed at one instant: what users act on under delay.
struct HistorySample {
  double time = 0.0;
  PopulationState state;
  UtilityVector utilities;
};

/// Returns the (possibly interpolated) sample at an arbitrary past time.
using HistoryLookup = std::function<HistorySample(double)>;

/// Sampled solution of the (delayed) replicator dynamics.
struct Trajectory {
  std::vector<double> times;
  std::vector<PopulationState> states;
  std::vector<UtilityVector> utilities;
  /// Sum / max over steps of the drift removed by simplex projection.
  double total_correction = 0.0;
  double max_correction = 0.0;
  /// Mass removed when groups crossed zero, and when/which.
  double absorbed_mass = 0.0;
  struct Extinction {
    double time;
    std::size_t group;
  };
  std::vector<Extinction> extinctions;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
  void push(double t, PopulationState p, UtilityVector u) {
    times.push_back(t);
    states.push_back(std::move(p));
    utilities.push_back(std::move(u));
  }
};

}  // namespace irsgame
