#include "irsgame/rng.hpp"

#include <cmath>
#include <numbers>

namespace irsgame {

std::complex<double> Xoshiro256::complex_normal() noexcept {
  const double radius = std::sqrt(-std::log(uniform_open0()));
  const double angle = 2.0 * std::numbers::pi * uniform_open0();
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace irsgame
