#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "cbs/phys.hpp"

namespace cbs::testing {

inline double rel_err(cplx a, cplx b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

inline AtomFieldParams params(double rabi, double detuning, double gamma = 1.0) {
  AtomFieldParams p;
  p.rabi = rabi;
  p.detuning = detuning;
  p.gamma = gamma;
  return p;
}

inline AtomFieldParams random_params(std::mt19937_64& rng, double max_rabi = 10.0,
                                     double max_detuning = 6.0) {
  std::uniform_real_distribution<double> r(0.05, max_rabi), d(-max_detuning, max_detuning);
  return params(r(rng), d(rng));
}

}  // namespace cbs::testing
