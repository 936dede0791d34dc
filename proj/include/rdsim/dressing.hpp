#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdsim/dynamics.hpp"

namespace rdsim {

// Laser and lattice parameters of a Rydberg-dressed setup. Frequencies are
// angular; times are in the reciprocal unit.
struct DressingParams {
  double rabi = 0.0;
  double detuning = 0.0;
  double hopping = 1.0;
  std::optional<double> lifetime;        // effective dressed-state lifetime
  std::optional<int> principal_number;
  std::optional<double> duty_cycle;      // stroboscopic dressing, (0, 1]

  // Throws DomainError on a zero detuning or an out-of-range duty cycle;
  // returns advisory messages (weak-dressing condition violated).
  std::vector<std::string> validate() const;
};

// beta = Omega / (2 Delta).
double dressing_amplitude(double rabi, double detuning);
// Short-distance saturation value of the dressed interaction, Omega^4 / (2|Delta|)^3.
double softcore_cap(double rabi, double detuning);
// M = J tau: sites explored per loss event.
double figure_of_merit(double hopping, double lifetime);
// Loss rate relative to hopping scales as n^-5, so M gains (n_to / n_from)^5.
double n_scaling_gain(int n_from, int n_to);

struct StroboscopicScaling {
  double beta = 1.0;
  double loss_rate = 1.0;
  double merit = 1.0;
};
// Duty cycle eta: beta * eta^-1/4, Gamma * eta^1/2, M * eta^1/2.
StroboscopicScaling stroboscopic_scaling(double duty_cycle);

double survival_probability(double loss_rate, double dressed_time);

// Exposure of a protocol to dressing loss: integral of sqrt(s(t) / s_peak)
// over the intervals where s exceeds 1e-6 of its peak (loss grows with
// beta^2 while the interaction grows with beta^4).
struct DressedExposure {
  double dressed_time = 0.0;
  double active_time = 0.0;  // unweighted length of the same intervals
};
DressedExposure dressed_time(const Schedule& interaction, double t0, double t1);

// Block embedded in run summaries.
struct DressingReport {
  double beta = 0.0;
  double softcore_cap = 0.0;
  std::optional<double> figure_of_merit;
  double dressed_time = 0.0;
  double active_time = 0.0;
  std::optional<double> survival;
  std::optional<StroboscopicScaling> stroboscopic;
  std::vector<std::string> advisories;
};
DressingReport dressing_report(const DressingParams& p, const DressedExposure& exposure);

}  // namespace rdsim
