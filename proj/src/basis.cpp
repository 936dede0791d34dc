#include "rdsim/basis.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

const char* to_string(Exchange e) noexcept {
  switch (e) {
    case Exchange::symmetric: return "symmetric";
    case Exchange::antisymmetric: return "antisymmetric";
    case Exchange::distinguishable: return "distinguishable";
  }
  return "?";
}

SectorBasis::SectorBasis(const LatticeGeometry& g, int particles, Exchange symmetry)
    : geometry_(g), particles_(particles), symmetry_(symmetry) {
  const std::int64_t n = g.num_sites();
  std::int64_t dim = n;
  if (particles == 2) {
    switch (symmetry) {
      case Exchange::symmetric: dim = n * (n + 1) / 2; break;
      case Exchange::antisymmetric: dim = n * (n - 1) / 2; break;
      case Exchange::distinguishable: dim = n * n; break;
    }
  }
  if (dim > std::numeric_limits<std::int32_t>::max()) {
    throw UnsupportedError("sector dimension " + std::to_string(dim) + " too large");
  }
  dim_ = static_cast<int>(dim);
  first_.reserve(static_cast<std::size_t>(dim));
  if (particles == 1) {
    for (int i = 0; i < n; ++i) first_.push_back(i);
    return;
  }
  second_.reserve(static_cast<std::size_t>(dim));
  for (int i = 0; i < n; ++i) {
    const int j0 = symmetry == Exchange::symmetric       ? i
                   : symmetry == Exchange::antisymmetric ? i + 1
                                                         : 0;
    for (int j = j0; j < n; ++j) {
      first_.push_back(i);
      second_.push_back(j);
    }
  }
}

SectorBasis SectorBasis::single_particle(const LatticeGeometry& g) {
  return SectorBasis(g, 1, Exchange::distinguishable);
}

SectorBasis SectorBasis::two_particle(const LatticeGeometry& g, Exchange symmetry) {
  return SectorBasis(g, 2, symmetry);
}

int SectorBasis::index_of(int i, int j) const noexcept {
  const std::int64_t n = num_sites();
  if (i < 0 || i >= n) return -1;
  if (particles_ == 1) return j == -1 ? i : -1;
  if (j < 0 || j >= n) return -1;
  const std::int64_t a = i;
  switch (symmetry_) {
    case Exchange::symmetric:
      if (j < i) return -1;
      return static_cast<int>(a * n - a * (a - 1) / 2 + (j - i));
    case Exchange::antisymmetric:
      if (j <= i) return -1;
      return static_cast<int>(a * (n - 1) - a * (a - 1) / 2 + (j - i - 1));
    case Exchange::distinguishable:
      return static_cast<int>(a * n + j);
  }
  return -1;
}

SectorBasis::Projection SectorBasis::project(int i, int j) const noexcept {
  if (particles_ == 1) return {index_of(i), 1.0};
  switch (symmetry_) {
    case Exchange::symmetric:
      if (i == j) return {index_of(i, i), 1.0};
      return {i < j ? index_of(i, j) : index_of(j, i), kInvSqrt2};
    case Exchange::antisymmetric:
      if (i == j) return {};
      return i < j ? Projection{index_of(i, j), kInvSqrt2} : Projection{index_of(j, i), -kInvSqrt2};
    case Exchange::distinguishable:
      return {index_of(i, j), 1.0};
  }
  return {};
}

SectorBasis build_sector_basis(const LatticeGeometry& g, int particle_count, Exchange symmetry) {
  if (particle_count == 1) return SectorBasis::single_particle(g);
  if (particle_count == 2) return SectorBasis::two_particle(g, symmetry);
  throw UnsupportedError("only one- and two-particle sectors are supported, requested " +
                         std::to_string(particle_count));
}

Complex pair_amplitude(const SectorBasis& basis, std::span<const Complex> state, int i, int j) {
  if (basis.particle_count() != 2) throw DomainError("pair_amplitude needs a two-particle sector");
  if (state.size() != static_cast<std::size_t>(basis.dim())) {
    throw ShapeError("state length does not match sector dimension");
  }
  const auto n = basis.num_sites();
  if (i < 0 || j < 0 || i >= n || j >= n) throw DomainError("site index out of range");
  switch (basis.symmetry()) {
    case Exchange::distinguishable:
      return state[static_cast<std::size_t>(basis.index_of(i, j))];
    case Exchange::symmetric:
      return state[static_cast<std::size_t>(i <= j ? basis.index_of(i, j) : basis.index_of(j, i))];
    case Exchange::antisymmetric:
      if (i == j) return 0.0;
      return i < j ? state[static_cast<std::size_t>(basis.index_of(i, j))]
                   : -state[static_cast<std::size_t>(basis.index_of(j, i))];
  }
  return 0.0;
}

StateVector basis_state(const SectorBasis& basis, int i, int j) {
  int idx = -1;
  if (basis.particle_count() == 1) {
    idx = basis.index_of(i);
  } else if (basis.symmetry() == Exchange::distinguishable) {
    idx = basis.index_of(i, j);
  } else {
    idx = basis.index_of(std::min(i, j), std::max(i, j));
  }
  if (idx < 0) {
    throw DomainError("sites (" + std::to_string(i) + "," + std::to_string(j) +
                      ") do not form a ket of the " + to_string(basis.symmetry()) + " sector");
  }
  StateVector psi(static_cast<std::size_t>(basis.dim()), 0.0);
  psi[static_cast<std::size_t>(idx)] = 1.0;
  return psi;
}

StateVector embed_distinguishable(const SectorBasis& basis, std::span<const Complex> state) {
  if (basis.particle_count() != 2) throw DomainError("embedding needs a two-particle sector");
  if (state.size() != static_cast<std::size_t>(basis.dim())) {
    throw ShapeError("state length does not match sector dimension");
  }
  const auto n = static_cast<std::size_t>(basis.num_sites());
  StateVector out(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const auto p = basis.project(static_cast<int>(a), static_cast<int>(b));
      if (p.index >= 0) out[a * n + b] = p.overlap * state[static_cast<std::size_t>(p.index)];
    }
  }
  return out;
}

std::vector<double> site_density(const SectorBasis& basis, std::span<const Complex> state) {
  if (state.size() != static_cast<std::size_t>(basis.dim())) {
    throw ShapeError("state length does not match sector dimension");
  }
  std::vector<double> rho(static_cast<std::size_t>(basis.num_sites()), 0.0);
  for (int k = 0; k < basis.dim(); ++k) {
    const double w = std::norm(state[static_cast<std::size_t>(k)]);
    const auto [i, j] = basis.sites(k);
    rho[static_cast<std::size_t>(i)] += w;
    if (j >= 0) rho[static_cast<std::size_t>(j)] += w;
  }
  return rho;
}

}  // namespace rdsim
