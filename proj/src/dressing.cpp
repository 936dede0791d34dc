#include "rdsim/dressing.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <sstream>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

constexpr double kActiveFraction = 1e-6;
constexpr double kWeakDressingLimit = 0.3;

}  // namespace

std::vector<std::string> DressingParams::validate() const {
  if (!(detuning != 0.0) || !std::isfinite(detuning)) throw DomainError("dressing detuning must be nonzero");
  if (!std::isfinite(rabi)) throw DomainError("Rabi frequency must be finite");
  if (!(hopping > 0.0)) throw DomainError("hopping must be positive");
  if (lifetime && !(*lifetime > 0.0)) throw DomainError("lifetime must be positive");
  if (principal_number && *principal_number < 1) throw DomainError("principal quantum number must be >= 1");
  if (duty_cycle && !(*duty_cycle > 0.0 && *duty_cycle <= 1.0)) throw DomainError("duty cycle must lie in (0, 1]");
  std::vector<std::string> notes;
  const double beta = std::abs(dressing_amplitude(rabi, detuning));
  if (beta > kWeakDressingLimit) {
    std::ostringstream s;
    s << "Omega/|2 Delta| = " << beta << " exceeds " << kWeakDressingLimit << "; weak-dressing expansion is unreliable";
    notes.push_back(s.str());
  }
  return notes;
}

double dressing_amplitude(double rabi, double detuning) {
  if (detuning == 0.0) throw DomainError("dressing amplitude needs a nonzero detuning");
  return rabi / (2.0 * detuning);
}

double softcore_cap(double rabi, double detuning) {
  if (detuning == 0.0) throw DomainError("soft-core cap needs a nonzero detuning");
  return std::pow(rabi, 4) / std::pow(2.0 * std::abs(detuning), 3);
}

double figure_of_merit(double hopping, double lifetime) {
  if (!(lifetime > 0.0)) throw DomainError("lifetime must be positive");
  return hopping * lifetime;
}

double n_scaling_gain(int n_from, int n_to) {
  if (n_from < 1 || n_to < 1) throw DomainError("principal quantum numbers must be >= 1");
  return std::pow(static_cast<double>(n_to) / n_from, 5);
}

StroboscopicScaling stroboscopic_scaling(double duty_cycle) {
  if (!(duty_cycle > 0.0 && duty_cycle <= 1.0)) throw DomainError("duty cycle must lie in (0, 1]");
  const double root = std::sqrt(duty_cycle);
  return {std::pow(duty_cycle, -0.25), root, root};
}

double survival_probability(double loss_rate, double dressed_time) {
  if (!(loss_rate >= 0.0) || !(dressed_time >= 0.0)) throw DomainError("loss rate and time must be >= 0");
  return std::exp(-loss_rate * dressed_time);
}

DressedExposure dressed_time(const Schedule& interaction, double t0, double t1) {
  if (t1 < t0) std::swap(t0, t1);
  DressedExposure out;
  if (t1 == t0) return out;
  // Peak from a fine scan plus the segment end points.
  std::vector<double> knots{t0, t1};
  for (const auto& s : interaction.segments()) {
    for (double b : {s.t_start, s.t_end}) {
      if (b > t0 && b < t1) knots.push_back(b);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  double peak = 0.0;
  constexpr int kScan = 2000;
  for (int k = 0; k <= kScan; ++k) peak = std::max(peak, std::abs(interaction.value(t0 + (t1 - t0) * k / kScan)));
  for (double b : knots) peak = std::max(peak, std::abs(interaction.value(b)));
  if (peak == 0.0) return out;
  const double floor = kActiveFraction * peak;
  auto weight = [&](double t) {
    const double v = std::abs(interaction.value(t));
    return v > floor ? std::sqrt(v / peak) : 0.0;
  };
  auto active = [&](double t) { return std::abs(interaction.value(t)) > floor ? 1.0 : 0.0; };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    out.dressed_time += Quad::integrate(weight, knots[i], knots[i + 1], 12, 1e-12);
    out.active_time += Quad::integrate(active, knots[i], knots[i + 1], 12, 1e-12);
  }
  return out;
}

DressingReport dressing_report(const DressingParams& p, const DressedExposure& exposure) {
  DressingReport r;
  r.advisories = p.validate();
  r.beta = dressing_amplitude(p.rabi, p.detuning);
  r.softcore_cap = softcore_cap(p.rabi, p.detuning);
  r.dressed_time = exposure.dressed_time;
  r.active_time = exposure.active_time;
  if (p.duty_cycle) r.stroboscopic = stroboscopic_scaling(*p.duty_cycle);
  if (p.lifetime) {
    double merit = figure_of_merit(p.hopping, *p.lifetime);
    if (r.stroboscopic) merit *= r.stroboscopic->merit;
    r.figure_of_merit = merit;
    // Dressed time is in units of 1/J, so Gamma * t = t / M.
    r.survival = survival_probability(1.0 / merit, exposure.dressed_time);
  }
  return r;
}

}  // namespace rdsim
