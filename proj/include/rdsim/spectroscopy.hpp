#pragma once

#include <string>
#include <vector>

#include "rdsim/dynamics.hpp"
#include "rdsim/lattice.hpp"
#include "rdsim/potentials.hpp"
#include "rdsim/rabi_fit.hpp"
#include "rdsim/solver.hpp"

namespace rdsim {

// One particle bound to a single nucleus, driven by g sin(w t) H_lin with
// H_lin the linear field (x - lx/2)/a0.
struct SpectroscopyParams {
  LatticeGeometry geometry{40, 38};
  NucleusSpec nucleus{{19.0, 18.0}, 1.0, 1.0};
  double bohr_radius = 1.0;
  double hopping = 1.0;
  double regularization = kDefaultRegularization;

  double drive = 0.01;
  double total_time = 1000.0;
  // Empty: 60 points on [0, J], extended to cover every bound-state gap.
  std::vector<double> omegas;
  int grid_points = 60;
  // Levels used to label resonances.
  int levels = 16;
  // Golden-section refinement of local maxima of A(w), to this tolerance in w.
  bool refine_peaks = true;
  double refine_tol = 2e-4;
  // Only maxima with A above this are refined and reported as peaks.
  double peak_threshold = 0.05;
  // Fits with RMS residual above this are rejected (amplitude NaN, flagged).
  double residual_limit = 0.2;
  int samples = 200;
  // Fourth-order steps sized by the drive period: the exponential midpoint
  // rule needs a far smaller step for the same trace accuracy.
  EvolveOptions evolve = default_evolve();
  EigenOptions eigen;
  int threads = 1;

  void validate() const;
  static EvolveOptions default_evolve() {
    EvolveOptions o;
    o.scheme = Propagator::magnus4;
    o.max_step = 1.0;
    return o;
  }
};

struct FrequencyRecord {
  double omega = 0.0;
  double amplitude = 0.0;
  double rabi = 0.0;
  double residual = 0.0;
  bool flat = false;
  bool fit_failed = false;
  bool unbound = false;  // final energy E0 + w above the band edge -4J
  bool refined = false;  // evaluated during peak refinement
};

struct SpectralLevel {
  int index = 0;
  double energy = 0.0;
  double gap = 0.0;            // E_n - E_0
  double matrix_element = 0.0; // <n|H_lin|0>
  std::string label;
  bool unbound = false;
};

struct Resonance {
  int level = 0;
  std::string label;
  double gap = 0.0;
  double matrix_element = 0.0;
  double peak_omega = 0.0;      // refined maximum of A(w) nearest the gap; NaN if none
  double peak_amplitude = 0.0;
  double on_gap_amplitude = 0.0; // fitted A with the drive exactly at the gap
  double tolerance = 0.0;        // 3 g |M|
  bool within_tolerance = false;
  bool unbound = false;
};

struct SpectroscopyResult {
  double ground_energy = 0.0;
  double unbound_threshold = 0.0;  // w above which E0 + w > -4J
  std::vector<SpectralLevel> levels;
  std::vector<FrequencyRecord> records;  // sorted by w
  std::vector<double> peaks;             // refined maxima of A(w)
  std::vector<Resonance> resonances;
  std::vector<StateVector> level_states;  // for orbital export
};

// Drives the Lanczos 1s state at one frequency and fits the survival trace.
FrequencyRecord drive_at(const SparseOperator& h0, const SparseOperator& h_lin, const StateVector& ground,
                         double omega, const SpectroscopyParams& p, double unbound_threshold,
                         std::vector<RabiSample>* trace = nullptr);

SpectroscopyResult spectroscopy_sweep(const SpectroscopyParams& p);

}  // namespace rdsim
