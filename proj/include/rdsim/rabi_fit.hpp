#pragma once

#include <span>

namespace rdsim {

struct RabiSample {
  double t = 0.0;
  double p = 0.0;  // ground-state population
};

struct RabiFit {
  double amplitude = 0.0;  // A in 1 - A sin^2(Omega t), within [0, 1.2]
  double omega = 0.0;
  double residual = 0.0;  // RMS misfit
  bool flat = false;      // signal variance below 1e-8: A = Omega = 0
};

// Least-squares fit of p(t) = 1 - A sin^2(Omega t). For each Omega the best A
// is linear and solved in closed form, so only Omega is searched: a grid from
// a quarter oscillation over the sampled span up to the sampling Nyquist
// limit, then Brent refinement around the best grid point.
RabiFit fit_rabi(std::span<const RabiSample> samples);

}  // namespace rdsim
