#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rdsim/lattice.hpp"
#include "rdsim/state.hpp"

namespace rdsim {

// Spatial exchange symmetry of the two-particle wavefunction. A spin singlet
// has a symmetric ("bosonic") spatial part, a triplet an antisymmetric one.
enum class Exchange { symmetric, antisymmetric, distinguishable };

const char* to_string(Exchange e) noexcept;

// One-particle sites, or two-particle kets |i,j> ordered lexicographically:
// i <= j (symmetric), i < j (antisymmetric), all ordered pairs
// (distinguishable). Symmetrised kets with i != j carry 1/sqrt(2).
class SectorBasis {
 public:
  static SectorBasis single_particle(const LatticeGeometry& g);
  static SectorBasis two_particle(const LatticeGeometry& g, Exchange symmetry);

  int particle_count() const noexcept { return particles_; }
  int dim() const noexcept { return dim_; }
  int num_sites() const noexcept { return geometry_.num_sites(); }
  const LatticeGeometry& geometry() const noexcept { return geometry_; }
  Exchange symmetry() const noexcept { return symmetry_; }

  // Site pair of a basis ket; the second entry is -1 for one particle.
  std::pair<int, int> sites(int index) const noexcept {
    return {first_[static_cast<std::size_t>(index)],
            particles_ == 1 ? -1 : second_[static_cast<std::size_t>(index)]};
  }

  // Basis index of the ket containing the ordered product |i j>, and <ket|i j>
  // (1, +-1/sqrt2). index == -1 when |i j> has no component in this sector.
  struct Projection {
    int index = -1;
    double overlap = 0.0;
  };
  Projection project(int i, int j) const noexcept;

  // Inverse of sites(); -1 if the pair is not a basis ket in canonical order.
  int index_of(int i, int j = -1) const noexcept;

  bool operator==(const SectorBasis& o) const noexcept {
    return particles_ == o.particles_ && symmetry_ == o.symmetry_ && geometry_ == o.geometry_;
  }

 private:
  SectorBasis(const LatticeGeometry& g, int particles, Exchange symmetry);

  LatticeGeometry geometry_;
  int particles_;
  Exchange symmetry_;
  int dim_ = 0;
  std::vector<std::int32_t> first_;
  std::vector<std::int32_t> second_;
};

SectorBasis build_sector_basis(const LatticeGeometry& g, int particle_count,
                               Exchange symmetry = Exchange::symmetric);

// Coefficient of the sector ket holding (i, j), signed by the requested
// ordering: equal under swap for symmetric kets, opposite for antisymmetric,
// exactly 0 for i == j in the antisymmetric sector.
Complex pair_amplitude(const SectorBasis& basis, std::span<const Complex> state, int i, int j);

// Unit state on the ket containing the given sites (one or two).
StateVector basis_state(const SectorBasis& basis, int i, int j = -1);

// psi(i, j) on the distinguishable N*N grid, normalised in that space.
StateVector embed_distinguishable(const SectorBasis& basis, std::span<const Complex> state);

// Expected particle number per site.
std::vector<double> site_density(const SectorBasis& basis, std::span<const Complex> state);

}  // namespace rdsim
