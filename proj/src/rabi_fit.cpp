#include "rdsim/rabi_fit.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

constexpr double kMaxAmplitude = 1.2;
constexpr int kGridPerQuarter = 8;

struct Projected {
  double amplitude;
  double sse;
};

Projected project(std::span<const RabiSample> samples, double omega) {
  double sy = 0.0, ss = 0.0, yy = 0.0;
  for (const auto& s : samples) {
    const double b = std::pow(std::sin(omega * s.t), 2);
    const double y = 1.0 - s.p;
    sy += b * y;
    ss += b * b;
    yy += y * y;
  }
  const double a = ss > 0.0 ? std::clamp(sy / ss, 0.0, kMaxAmplitude) : 0.0;
  return {a, std::max(0.0, yy - 2.0 * a * sy + a * a * ss)};
}

}  // namespace

RabiFit fit_rabi(std::span<const RabiSample> samples) {
  if (samples.size() < 16) throw DomainError("Rabi fit needs at least 16 samples");
  std::vector<double> times;
  for (const auto& s : samples) {
    if (!std::isfinite(s.t) || !std::isfinite(s.p)) throw DomainError("non-finite Rabi sample");
    times.push_back(s.t);
  }
  std::sort(times.begin(), times.end());
  const double span = times.back() - times.front();
  double spacing = span;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] > times[i - 1]) spacing = std::min(spacing, times[i] - times[i - 1]);
  }
  if (!(span > 0.0)) throw DomainError("Rabi samples must span a time interval");

  const auto n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (const auto& s : samples) mean += s.p;
  mean /= n;
  double var = 0.0;
  for (const auto& s : samples) var += (s.p - mean) * (s.p - mean);
  var /= n;
  RabiFit fit;
  if (var < 1e-8) {
    double sse = 0.0;
    for (const auto& s : samples) sse += (1.0 - s.p) * (1.0 - s.p);
    fit.residual = std::sqrt(sse / n);
    fit.flat = true;
    return fit;
  }

  const double lo = 0.5 * std::numbers::pi / span;
  const double hi = std::max(lo, 0.5 * std::numbers::pi / spacing);
  const double step = lo / kGridPerQuarter;
  double best_omega = lo;
  double best_sse = std::numeric_limits<double>::infinity();
  for (double w = lo; w <= hi; w += step) {
    const double sse = project(samples, w).sse;
    if (sse < best_sse) {
      best_sse = sse;
      best_omega = w;
    }
  }
  const auto objective = [&](double w) { return project(samples, w).sse; };
  const auto [omega, sse] = boost::math::tools::brent_find_minima(
      objective, std::max(0.5 * lo, best_omega - step), std::min(hi + step, best_omega + step),
      std::numeric_limits<double>::digits);
  const double w = sse < best_sse ? omega : best_omega;
  const auto p = project(samples, w);
  fit.amplitude = p.amplitude;
  fit.omega = w;
  fit.residual = std::sqrt(p.sse / n);
  return fit;
}

}  // namespace rdsim
