#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "rdsim/basis.hpp"
#include "rdsim/interactions.hpp"
#include "rdsim/state.hpp"

namespace rdsim {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

// Real symmetric matrix in compressed row form. Hamiltonians are real in the
// site basis; only states carry complex amplitudes.
class SparseOperator {
 public:
  SparseOperator() = default;

  // Duplicate entries are summed; entries that sum to exactly zero are kept
  // off the pattern.
  static SparseOperator from_triplets(int dim, std::vector<Triplet> triplets);
  static SparseOperator diagonal(std::span<const double> diag);

  int dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return cols_.size(); }

  std::span<const std::int64_t> row_offsets() const noexcept { return offsets_; }
  std::span<const std::int32_t> columns() const noexcept { return cols_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }

  // y = A x. y must not alias x.
  void apply(std::span<const Complex> x, std::span<Complex> y) const;
  void apply(std::span<const double> x, std::span<double> y) const;

  double element(int row, int col) const;
  // Largest absolute row sum; an upper bound on the spectral radius.
  double norm_bound() const;
  // Max |A_ij - A_ji| over the stored pattern (and its transpose).
  double asymmetry() const;
  // Row-major dense copy, for small oracles.
  std::vector<double> to_dense() const;

  SparseOperator scaled(double factor) const;

 private:
  int dim_ = 0;
  std::vector<std::int64_t> offsets_{0};
  std::vector<std::int32_t> cols_;
  std::vector<double> values_;

  friend class OperatorSum;
};

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);

// Returns A psi as a new vector.
StateVector multiply(const SparseOperator& op, std::span<const Complex> psi);
// <psi|A|psi> / <psi|psi>.
double expectation(const SparseOperator& op, std::span<const Complex> psi);

// "row col value" per line, rows ascending.
void write_triplets(const SparseOperator& op, std::ostream& out);

// Nearest-neighbour hopping -J lifted to the sector.
SparseOperator assemble_hopping(const SectorBasis& basis, double J);
// Diagonal operator sum_particles field(site).
SparseOperator assemble_site_diagonal(const SectorBasis& basis, std::span<const double> field);
// Hopping minus the attractive background field.
SparseOperator assemble_h0(const SectorBasis& basis, std::span<const double> potential_field,
                           double J);
// Diagonal pair energies; domain error on a one-particle basis.
SparseOperator assemble_interaction(const SectorBasis& basis, const InteractionSpec& spec);
// Linear drive profile (x - lx/2)/a0 for every particle.
SparseOperator assemble_linear_drive(const SectorBasis& basis, double a0);

// Weighted sums of fixed operators over their union sparsity pattern.
class OperatorSum {
 public:
  explicit OperatorSum(std::vector<SparseOperator> parts);

  std::size_t size() const noexcept { return parts_.size(); }
  int dim() const noexcept { return pattern_.dim(); }
  const SparseOperator& part(std::size_t k) const { return parts_.at(k); }

  // sum_k coeffs[k] * parts[k].
  SparseOperator combine(std::span<const double> coeffs) const;
  // Same, writing into a previously combined operator (no allocation).
  void combine_into(std::span<const double> coeffs, SparseOperator& out) const;

 private:
  std::vector<SparseOperator> parts_;
  SparseOperator pattern_;
  std::vector<std::vector<std::int64_t>> slots_;
};

}  // namespace rdsim
