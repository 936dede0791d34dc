#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rdsim/errors.hpp"
#include "rdsim/rabi_fit.hpp"

using namespace rdsim;

namespace {

template <class F>
std::vector<RabiSample> sample(F p, double t_end, int n) {
  std::vector<RabiSample> s;
  for (int k = 0; k <= n; ++k) {
    const double t = t_end * k / n;
    s.push_back({t, p(t)});
  }
  return s;
}

}  // namespace

TEST_CASE("noiseless model is recovered exactly") {
  const auto s = sample([](double t) { return 1.0 - 0.8 * std::pow(std::sin(0.3 * t), 2); }, 100.0, 200);
  const auto f = fit_rabi(s);
  CHECK(std::abs(f.amplitude - 0.8) <= 1e-6);
  CHECK(std::abs(f.omega - 0.3) <= 1e-6);
  CHECK(f.residual <= 1e-7);
  CHECK_FALSE(f.flat);
}

TEST_CASE("recovery across amplitudes and frequencies") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ua(0.05, 1.0), uw(0.02, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = ua(rng), w = uw(rng);
    const auto s = sample([&](double t) { return 1.0 - a * std::pow(std::sin(w * t), 2); }, 80.0, 400);
    const auto f = fit_rabi(s);
    CHECK(std::abs(f.amplitude - a) <= 1e-6);
    CHECK(std::abs(f.omega - w) <= 1e-6);
  }
}

TEST_CASE("slow oscillation covering half a Rabi period") {
  const auto s = sample([](double t) { return 1.0 - 0.6 * std::pow(std::sin(0.0016 * t), 2); }, 1000.0, 200);
  const auto f = fit_rabi(s);
  CHECK(f.amplitude == doctest::Approx(0.6).epsilon(1e-6));
  CHECK(f.omega == doctest::Approx(0.0016).epsilon(1e-6));
}

TEST_CASE("flat signal") {
  const auto s = sample([](double) { return 1.0; }, 10.0, 50);
  const auto f = fit_rabi(s);
  CHECK(f.flat);
  CHECK(f.amplitude == 0.0);
  CHECK(f.omega == 0.0);
  CHECK(f.residual == 0.0);
}

TEST_CASE("two-tone signal is fitted with an elevated residual") {
  // Dominant tone 0.5 sin^2(0.2 t) plus a 0.15 sin^2(0.9 t) admixture. The
  // best single-tone fit cannot absorb the second tone, whose own RMS about
  // its mean is 0.15 / sqrt(8) = 0.053; the residual sits near that level.
  const auto s = sample(
      [](double t) { return 1.0 - 0.5 * std::pow(std::sin(0.2 * t), 2) - 0.15 * std::pow(std::sin(0.9 * t), 2); },
      150.0, 600);
  const auto f = fit_rabi(s);
  CHECK(f.omega == doctest::Approx(0.2).epsilon(0.05));
  CHECK(f.residual > 0.03);
  CHECK(f.residual < 0.1);
  CHECK(f.amplitude >= 0.0);
  CHECK(f.amplitude <= 1.2);
}

TEST_CASE("input validation") {
  std::vector<RabiSample> few(5, {0.0, 1.0});
  CHECK_THROWS_AS(fit_rabi(few), DomainError);
  std::vector<RabiSample> same(20, {1.0, 0.5});
  CHECK_THROWS_AS(fit_rabi(same), DomainError);
}
