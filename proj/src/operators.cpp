#include "rdsim/operators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "rdsim/errors.hpp"
#include "rdsim/potentials.hpp"

namespace rdsim {

SparseOperator SparseOperator::from_triplets(int dim, std::vector<Triplet> triplets) {
  if (dim < 0) throw DomainError("negative operator dimension");
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim) {
      throw ShapeError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                       ") outside a " + std::to_string(dim) + "-dimensional operator");
    }
  }
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseOperator op;
  op.dim_ = dim;
  op.offsets_.assign(static_cast<std::size_t>(dim) + 1, 0);
  op.cols_.reserve(triplets.size());
  op.values_.reserve(triplets.size());
  std::size_t k = 0;
  for (int r = 0; r < dim; ++r) {
    while (k < triplets.size() && triplets[k].row == r) {
      const int c = triplets[k].col;
      double v = 0.0;
      while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
        v += triplets[k].value;
        ++k;
      }
      if (v != 0.0) {
        op.cols_.push_back(c);
        op.values_.push_back(v);
      }
    }
    op.offsets_[static_cast<std::size_t>(r) + 1] = static_cast<std::int64_t>(op.cols_.size());
  }
  return op;
}

SparseOperator SparseOperator::diagonal(std::span<const double> diag) {
  SparseOperator op;
  op.dim_ = static_cast<int>(diag.size());
  op.offsets_.assign(diag.size() + 1, 0);
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (diag[i] != 0.0) {
      op.cols_.push_back(static_cast<std::int32_t>(i));
      op.values_.push_back(diag[i]);
    }
    op.offsets_[i + 1] = static_cast<std::int64_t>(op.cols_.size());
  }
  return op;
}

void SparseOperator::apply(std::span<const Complex> x, std::span<Complex> y) const {
  if (x.size() != static_cast<std::size_t>(dim_) || y.size() != static_cast<std::size_t>(dim_)) {
    throw ShapeError("operator of dimension " + std::to_string(dim_) + " applied to vector of length " +
                     std::to_string(x.size()));
  }
  const auto* off = offsets_.data();
  const auto* col = cols_.data();
  const auto* val = values_.data();
  const auto* xd = reinterpret_cast<const double*>(x.data());
  auto* yd = reinterpret_cast<double*>(y.data());
#pragma omp parallel for schedule(static)
  for (int r = 0; r < dim_; ++r) {
    double re = 0.0;
    double im = 0.0;
    for (std::int64_t k = off[r]; k < off[r + 1]; ++k) {
      const double v = val[k];
      const std::size_t c = static_cast<std::size_t>(col[k]);
      re += v * xd[2 * c];
      im += v * xd[2 * c + 1];
    }
    yd[2 * static_cast<std::size_t>(r)] = re;
    yd[2 * static_cast<std::size_t>(r) + 1] = im;
  }
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(dim_) || y.size() != static_cast<std::size_t>(dim_)) {
    throw ShapeError("operator of dimension " + std::to_string(dim_) + " applied to vector of length " +
                     std::to_string(x.size()));
  }
#pragma omp parallel for schedule(static)
  for (int r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (std::int64_t k = offsets_[static_cast<std::size_t>(r)];
         k < offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
      s += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
    }
    y[static_cast<std::size_t>(r)] = s;
  }
}

double SparseOperator::element(int row, int col) const {
  if (row < 0 || row >= dim_ || col < 0 || col >= dim_) throw ShapeError("element index out of range");
  const auto begin = cols_.begin() + offsets_[static_cast<std::size_t>(row)];
  const auto end = cols_.begin() + offsets_[static_cast<std::size_t>(row) + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

double SparseOperator::norm_bound() const {
  double best = 0.0;
  for (int r = 0; r < dim_; ++r) {
    double s = 0.0;
    for (auto k = offsets_[static_cast<std::size_t>(r)]; k < offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
      s += std::abs(values_[static_cast<std::size_t>(k)]);
    }
    best = std::max(best, s);
  }
  return best;
}

double SparseOperator::asymmetry() const {
  double worst = 0.0;
  for (int r = 0; r < dim_; ++r) {
    for (auto k = offsets_[static_cast<std::size_t>(r)]; k < offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
      const int c = cols_[static_cast<std::size_t>(k)];
      worst = std::max(worst, std::abs(values_[static_cast<std::size_t>(k)] - element(c, r)));
    }
  }
  return worst;
}

std::vector<double> SparseOperator::to_dense() const {
  const auto n = static_cast<std::size_t>(dim_);
  std::vector<double> out(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (auto k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      out[r * n + static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])] =
          values_[static_cast<std::size_t>(k)];
    }
  }
  return out;
}

SparseOperator SparseOperator::scaled(double factor) const {
  SparseOperator out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  if (a.dim() != b.dim()) throw ShapeError("adding operators of different dimension");
  const double ones[2] = {1.0, 1.0};
  return OperatorSum({a, b}).combine(ones);
}

StateVector multiply(const SparseOperator& op, std::span<const Complex> psi) {
  StateVector out(psi.size());
  op.apply(psi, out);
  return out;
}

double expectation(const SparseOperator& op, std::span<const Complex> psi) {
  const auto h_psi = multiply(op, psi);
  const double nn = std::norm(norm(psi));
  if (nn == 0.0) throw DomainError("expectation value in the zero vector");
  return inner(psi, h_psi).real() / nn;
}

void write_triplets(const SparseOperator& op, std::ostream& out) {
  const auto off = op.row_offsets();
  const auto cols = op.columns();
  const auto vals = op.values();
  const auto old_precision = out.precision(17);
  for (int r = 0; r < op.dim(); ++r) {
    for (auto k = off[static_cast<std::size_t>(r)]; k < off[static_cast<std::size_t>(r) + 1]; ++k) {
      out << r << ' ' << cols[static_cast<std::size_t>(k)] << ' ' << vals[static_cast<std::size_t>(k)] << '\n';
    }
  }
  out.precision(old_precision);
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

struct Component {
  int a;
  int b;
  double weight;
};

// Ordered-product components of a sector ket.
int ket_components(const SectorBasis& basis, int index, Component out[2]) {
  const auto [i, j] = basis.sites(index);
  if (basis.particle_count() == 1) {
    out[0] = {i, -1, 1.0};
    return 1;
  }
  switch (basis.symmetry()) {
    case Exchange::distinguishable:
      out[0] = {i, j, 1.0};
      return 1;
    case Exchange::symmetric:
      if (i == j) {
        out[0] = {i, i, 1.0};
        return 1;
      }
      out[0] = {i, j, kInvSqrt2};
      out[1] = {j, i, kInvSqrt2};
      return 2;
    case Exchange::antisymmetric:
      out[0] = {i, j, kInvSqrt2};
      out[1] = {j, i, -kInvSqrt2};
      return 2;
  }
  return 0;
}

// Lift a one-body operator, given as a per-site adjacency list, to the sector:
// sum over particles of h acting on that particle.
SparseOperator lift_one_body(const SectorBasis& basis,
                             const std::vector<std::vector<std::pair<int, double>>>& h) {
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(basis.dim()) * 12);
  std::vector<std::pair<int, double>> row;
  for (int col = 0; col < basis.dim(); ++col) {
    Component comps[2];
    const int nc = ket_components(basis, col, comps);
    row.clear();
    for (int c = 0; c < nc; ++c) {
      const auto& [a, b, w] = comps[c];
      for (const auto& [k, hk] : h[static_cast<std::size_t>(a)]) {
        const auto p = basis.project(k, b);
        if (p.index >= 0) row.emplace_back(p.index, w * hk * p.overlap);
      }
      if (b >= 0) {
        for (const auto& [l, hl] : h[static_cast<std::size_t>(b)]) {
          const auto p = basis.project(a, l);
          if (p.index >= 0) row.emplace_back(p.index, w * hl * p.overlap);
        }
      }
    }
    for (const auto& [r, v] : row) triplets.push_back({r, col, v});
  }
  auto op = SparseOperator::from_triplets(basis.dim(), std::move(triplets));
  // Rounding in the sqrt(2) factors can leave the pattern asymmetric by an ulp;
  // enforce exact symmetry so that real Lanczos sees a symmetric operator.
  auto vals = op.mutable_values();
  const auto off = op.row_offsets();
  const auto cols = op.columns();
  for (int r = 0; r < op.dim(); ++r) {
    for (auto k = off[static_cast<std::size_t>(r)]; k < off[static_cast<std::size_t>(r) + 1]; ++k) {
      const int c = cols[static_cast<std::size_t>(k)];
      if (c <= r) continue;
      const double t = op.element(c, r);
      const double avg = 0.5 * (vals[static_cast<std::size_t>(k)] + t);
      vals[static_cast<std::size_t>(k)] = avg;
      const auto begin = cols.begin() + off[static_cast<std::size_t>(c)];
      const auto end = cols.begin() + off[static_cast<std::size_t>(c) + 1];
      const auto it = std::lower_bound(begin, end, r);
      if (it != end && *it == r) vals[static_cast<std::size_t>(it - cols.begin())] = avg;
    }
  }
  return op;
}

void check_field(const SectorBasis& basis, std::span<const double> field) {
  if (field.size() != static_cast<std::size_t>(basis.num_sites())) {
    throw ShapeError("site field has " + std::to_string(field.size()) + " entries, lattice has " +
                     std::to_string(basis.num_sites()));
  }
}

}  // namespace

SparseOperator assemble_hopping(const SectorBasis& basis, double J) {
  const auto& g = basis.geometry();
  std::vector<std::vector<std::pair<int, double>>> h(static_cast<std::size_t>(g.num_sites()));
  for (const auto& [i, j] : g.bonds()) {
    h[static_cast<std::size_t>(i)].emplace_back(j, -J);
    h[static_cast<std::size_t>(j)].emplace_back(i, -J);
  }
  return lift_one_body(basis, h);
}

SparseOperator assemble_site_diagonal(const SectorBasis& basis, std::span<const double> field) {
  check_field(basis, field);
  std::vector<double> diag(static_cast<std::size_t>(basis.dim()));
  for (int k = 0; k < basis.dim(); ++k) {
    const auto [i, j] = basis.sites(k);
    double v = field[static_cast<std::size_t>(i)];
    if (j >= 0) v += field[static_cast<std::size_t>(j)];
    diag[static_cast<std::size_t>(k)] = v;
  }
  return SparseOperator::diagonal(diag);
}

SparseOperator assemble_h0(const SectorBasis& basis, std::span<const double> potential_field,
                           double J) {
  check_field(basis, potential_field);
  std::vector<double> minus(potential_field.begin(), potential_field.end());
  for (auto& v : minus) v = -v;
  return assemble_hopping(basis, J) + assemble_site_diagonal(basis, minus);
}

SparseOperator assemble_interaction(const SectorBasis& basis, const InteractionSpec& spec) {
  if (basis.particle_count() != 2) throw DomainError("interaction operator needs a two-particle sector");
  const InteractionTable table(basis.geometry(), spec);
  const auto& g = basis.geometry();
  std::vector<double> diag(static_cast<std::size_t>(basis.dim()));
  for (int k = 0; k < basis.dim(); ++k) {
    const auto [i, j] = basis.sites(k);
    diag[static_cast<std::size_t>(k)] = table(g.site_coord(i), g.site_coord(j));
  }
  return SparseOperator::diagonal(diag);
}

SparseOperator assemble_linear_drive(const SectorBasis& basis, double a0) {
  const auto field = linear_drive_field(basis.geometry(), a0);
  return assemble_site_diagonal(basis, field);
}

OperatorSum::OperatorSum(std::vector<SparseOperator> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw DomainError("operator sum needs at least one part");
  const int dim = parts_.front().dim();
  for (const auto& p : parts_) {
    if (p.dim() != dim) throw ShapeError("operator sum parts have different dimensions");
  }
  pattern_.dim_ = dim;
  pattern_.offsets_.assign(static_cast<std::size_t>(dim) + 1, 0);
  slots_.resize(parts_.size());
  for (std::size_t k = 0; k < parts_.size(); ++k) slots_[k].resize(parts_[k].nnz());
  std::vector<std::int32_t> merged;
  for (int r = 0; r < dim; ++r) {
    merged.clear();
    for (const auto& p : parts_) {
      for (auto k = p.offsets_[static_cast<std::size_t>(r)]; k < p.offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
        merged.push_back(p.cols_[static_cast<std::size_t>(k)]);
      }
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    const auto base = static_cast<std::int64_t>(pattern_.cols_.size());
    pattern_.cols_.insert(pattern_.cols_.end(), merged.begin(), merged.end());
    for (std::size_t q = 0; q < parts_.size(); ++q) {
      const auto& p = parts_[q];
      for (auto k = p.offsets_[static_cast<std::size_t>(r)]; k < p.offsets_[static_cast<std::size_t>(r) + 1]; ++k) {
        const auto it = std::lower_bound(merged.begin(), merged.end(), p.cols_[static_cast<std::size_t>(k)]);
        slots_[q][static_cast<std::size_t>(k)] = base + (it - merged.begin());
      }
    }
    pattern_.offsets_[static_cast<std::size_t>(r) + 1] = static_cast<std::int64_t>(pattern_.cols_.size());
  }
  pattern_.values_.assign(pattern_.cols_.size(), 0.0);
}

SparseOperator OperatorSum::combine(std::span<const double> coeffs) const {
  SparseOperator out = pattern_;
  combine_into(coeffs, out);
  return out;
}

void OperatorSum::combine_into(std::span<const double> coeffs, SparseOperator& out) const {
  if (coeffs.size() != parts_.size()) throw ShapeError("one coefficient per operator part required");
  if (out.cols_.size() != pattern_.cols_.size() || out.dim_ != pattern_.dim_) out = pattern_;
  std::fill(out.values_.begin(), out.values_.end(), 0.0);
  for (std::size_t q = 0; q < parts_.size(); ++q) {
    const double c = coeffs[q];
    if (c == 0.0) continue;
    const auto& vals = parts_[q].values_;
    const auto& slot = slots_[q];
    for (std::size_t k = 0; k < vals.size(); ++k) out.values_[static_cast<std::size_t>(slot[k])] += c * vals[k];
  }
}

}  // namespace rdsim
