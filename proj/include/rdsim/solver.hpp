#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdsim/lattice.hpp"
#include "rdsim/operators.hpp"
#include "rdsim/state.hpp"

namespace rdsim {

struct EigenOptions {
  // Residual bound relative to the operator norm estimate.
  double tol = 1e-10;
  int max_restarts = 2000;
  // Krylov basis size; 0 picks max(2k + 24, 48).
  int krylov_dim = 0;
  std::uint64_t seed = 20240917;
  // Problems up to this dimension are diagonalised densely.
  int dense_threshold = 2000;
  // Eigenvalues closer than this (relative to the norm estimate) are treated
  // as one degenerate group when checking for missed copies.
  double degeneracy_tol = 1e-9;
};

struct Eigenpair {
  double energy = 0.0;
  StateVector state;
  double residual = 0.0;
};

Eigenpair ground_state(const SparseOperator& h, const EigenOptions& opts = {});

// k lowest eigenpairs in ascending order.
std::vector<Eigenpair> low_spectrum(const SparseOperator& h, int k, const EigenOptions& opts = {});

// Full spectrum by dense diagonalisation (oracle and small problems).
std::vector<double> dense_eigenvalues(const SparseOperator& h);

// -Ry/(2n-1)^2 with Ry = J/a0^2, measured from the band bottom -4J.
double principal_energy(int n, double a0, double J = 1.0);

// Lower edge of the free-particle band on the square lattice, -4J. Bound
// states of a single particle lie below it.
inline double band_bottom(double J = 1.0) { return -4.0 * J; }

struct OrbitalClass {
  std::string label;  // "1s", "2p", ..., or "other"
  int angular_momentum = -1;
  int radial_nodes = -1;
  double angular_weight = 0.0;  // fraction of the norm in the dominant |m|
};

// Radial node count and dominant ring harmonic |m| about the nucleus.
OrbitalClass classify_orbital_detail(std::span<const Complex> psi, const LatticeGeometry& g,
                                     Point2 nucleus);
std::string classify_orbital(std::span<const Complex> psi, const LatticeGeometry& g,
                             Point2 nucleus);

}  // namespace rdsim
