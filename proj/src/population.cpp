#include "irsgame/population.hpp"

#include <cmath>
#include <numeric>

namespace irsgame {

PopulationState PopulationState::uniform(std::size_t groups) {
  return PopulationState(std::vector<double>(groups, 1.0 / static_cast<double>(groups)));
}

double PopulationState::sum() const noexcept {
  return std::accumulate(p_.begin(), p_.end(), 0.0);
}

bool PopulationState::on_simplex(double tol) const noexcept {
  if (p_.empty()) return false;
  for (double v : p_) {
    if (!(v >= 0.0)) return false;
  }
  return std::abs(sum() - 1.0) <= tol;
}

}  // namespace irsgame
