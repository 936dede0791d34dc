#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdsim/basis.hpp"
#include "rdsim/dressing.hpp"
#include "rdsim/dynamics.hpp"
#include "rdsim/interactions.hpp"
#include "rdsim/lattice.hpp"
#include "rdsim/potentials.hpp"
#include "rdsim/solver.hpp"

namespace rdsim {

enum class PrepKind { bosonic_helium, fermionic_helium, hydrogen2, custom };

const char* to_string(PrepKind k) noexcept;

// Adiabatic two-particle preparation. Stages, in order:
//   1. hopping ramps 0 -> J with sin^4 over ramp_time, all potentials static;
//   2. if an auxiliary nucleus is present, it ramps down over aux_ramp_time;
//   3. the interaction ramps up over interaction_time while the orbital bias
//      (if any) ramps down.
// With start_from_ground_state, stages 1-2 are skipped and the run starts in
// the exact noninteracting ground state of the final one-body Hamiltonian.
struct PrepParams {
  PrepKind kind = PrepKind::custom;
  LatticeGeometry geometry{21, 21};
  std::vector<NucleusSpec> nuclei;
  double bohr_radius = 4.0;
  double hopping = 1.0;
  double regularization = kDefaultRegularization;
  InteractionSpec interaction;
  Exchange symmetry = Exchange::symmetric;
  double ramp_time = 200.0;
  double interaction_time = 10.0;

  // Initial particle positions (site coordinates).
  SiteCoord first_site;
  SiteCoord second_site;

  // Auxiliary well at second_site, strength relative to nuclei[0].
  std::optional<double> aux_scale;
  double aux_ramp_time = 60.0;

  // Weak attractive bias proportional to |psi_2p| of nuclei[0]'s atom, peak
  // equal to this fraction of the deepest nuclear site energy; the 2p
  // combination is the one with the largest dipole along bias_axis_x ? x : y.
  std::optional<double> orbital_bias_fraction;
  bool bias_axis_x = true;

  bool start_from_ground_state = false;

  EvolveOptions evolve;
  // Repeat the run at half the step and report the fidelity change.
  bool verify_step = true;
  // Ground state of H(t) every this many trajectory samples (0: never).
  int instantaneous_stride = 10;
  EigenOptions eigen;

  std::optional<DressingParams> dressing;

  // Throws ValidationError on inconsistent parameters.
  void validate() const;
  double noninteracting_time() const noexcept;
  double total_time() const noexcept;
};

// Reference parameter sets. Padding p gives a (2p+1)^2 lattice for helium and
// (2p+1+d) x (2p+1) for the molecule.
PrepParams bosonic_helium_params(int padding = 10);
PrepParams fermionic_helium_params(int padding = 10);
PrepParams h2_params(Exchange symmetry, int separation = 3, int padding = 10);

struct EnergyComponents {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double total = 0.0;
};

// Kinetic, potential and interaction operators on one basis (interaction
// may be left empty for one particle).
struct HamiltonianParts {
  SparseOperator kinetic;
  SparseOperator potential;
  SparseOperator interaction;

  SparseOperator total() const;
};

EnergyComponents measure_energy_components(std::span<const Complex> psi, const HamiltonianParts& parts);

enum class PartKind { kinetic, potential, interaction };

// Everything needed to run (or reverse) a preparation.
struct PrepPlan {
  SectorBasis basis;
  TimeDependentHamiltonian hamiltonian;
  std::vector<PartKind> kinds;
  std::size_t interaction_part = 0;
  HamiltonianParts final_parts;  // target Hamiltonian split by kind
  StateVector initial;
  double t_end = 0.0;
  double interaction_start = 0.0;
};

PrepPlan build_prep_plan(const PrepParams& p);

struct TrajectorySample {
  double t = 0.0;
  double norm = 0.0;
  double fidelity_target = 0.0;
  double fidelity_instantaneous = 0.0;  // NaN where not computed
  EnergyComponents energy;              // of H(t)
};

struct RunResult {
  PrepKind kind = PrepKind::custom;
  Exchange symmetry = Exchange::symmetric;
  std::vector<TrajectorySample> trajectory;
  StateVector final_state;
  double final_fidelity = 0.0;  // weight in the target ground-state multiplet
  EnergyComponents final_energy;
  double exact_energy = 0.0;
  int ground_degeneracy = 1;
  // |E_final - E_exact| / |E_exact - E_ref| with E_ref = particles * (-4J):
  // the error relative to the binding energy below the free band edge.
  double relative_error = 0.0;
  // |E_final - E_exact| / |E_exact| with absolute lattice energies.
  double relative_error_absolute = 0.0;
  double interaction_start = 0.0;
  double t_end = 0.0;
  double step_halving_change = 0.0;  // NaN when not verified
  EvolveStats stats;
  DressedExposure exposure;
  std::optional<DressingReport> dressing;
};

RunResult prepare(const PrepParams& p);
RunResult prepare_bosonic_helium(const PrepParams& p);
RunResult prepare_fermionic_helium(const PrepParams& p);
RunResult prepare_h2(const PrepParams& p, Exchange symmetry);

// Runs the preparation backwards in time order (ramps undone in reverse) from
// the run's final state and returns the probability of finding the particles
// back on their initial sites.
double reverse_prep_return_probability(const RunResult& run, const PrepParams& p);

struct BondPoint {
  int separation = 0;
  double interaction_time = 0.0;
  double final_energy = 0.0;
  double exact_energy = 0.0;
  double atom_energy = 0.0;  // one-nucleus ground energy on the same lattice
  double binding = 0.0;      // E_final - 2 E_H
  double exact_binding = 0.0;
  double final_fidelity = 0.0;
  bool ok = true;
  std::string error;
};

// Interaction-ramp-only runs from the exact noninteracting ground state for
// every (d, T_int), dispatched to a pool of `threads` workers and returned
// sorted by (d, T_int).
std::vector<BondPoint> bond_scan(const PrepParams& base, const std::vector<int>& separations,
                                 const std::vector<double>& interaction_times, int threads = 1,
                                 int padding = 10);

}  // namespace rdsim
