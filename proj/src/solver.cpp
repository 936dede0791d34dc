#include "rdsim/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Sign convention shared by the dense and iterative paths: the component of
// largest magnitude is positive.
void fix_sign(VectorXd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

StateVector to_state(const VectorXd& v) {
  StateVector out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
  return out;
}

VectorXd multiply(const SparseOperator& h, const VectorXd& x) {
  VectorXd y(x.size());
  h.apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  return y;
}

double residual_norm(const SparseOperator& h, const VectorXd& v, double theta) {
  return (multiply(h, v) - theta * v).norm();
}

std::vector<Eigenpair> dense_lowest(const SparseOperator& h, int k) {
  const auto n = static_cast<Eigen::Index>(h.dim());
  const auto dense = h.to_dense();
  const MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      dense.data(), n, n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", NAN);
  std::vector<Eigenpair> out;
  for (int i = 0; i < k; ++i) {
    VectorXd v = es.eigenvectors().col(i);
    fix_sign(v);
    const double theta = es.eigenvalues()(i);
    out.push_back({theta, to_state(v), residual_norm(h, v, theta)});
  }
  return out;
}

VectorXd random_unit(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v.normalized();
}

// Orthogonalise w against the first `cols` columns of V and the locked set,
// twice, returning the projections onto V.
VectorXd orthogonalize(VectorXd& w, const MatrixXd& v, Eigen::Index cols, const MatrixXd& locked) {
  VectorXd h = VectorXd::Zero(cols);
  for (int pass = 0; pass < 2; ++pass) {
    if (locked.cols() > 0) w -= locked * (locked.transpose() * w);
    if (cols > 0) {
      const VectorXd c = v.leftCols(cols).transpose() * w;
      w -= v.leftCols(cols) * c;
      h += c;
    }
  }
  return h;
}

// Thick-restart Lanczos with full reorthogonalisation for the k lowest
// eigenpairs of h restricted to the complement of `locked`.
std::vector<Eigenpair> thick_restart_lanczos(const SparseOperator& h, int k, const MatrixXd& locked,
                                             const EigenOptions& opts, std::uint64_t seed) {
  const Eigen::Index n = h.dim();
  const Eigen::Index free_dim = n - locked.cols();
  if (k > free_dim) throw DomainError("more eigenpairs requested than the space holds");
  Eigen::Index m = opts.krylov_dim > 0 ? opts.krylov_dim : std::max<Eigen::Index>(2 * k + 24, 48);
  m = std::min(m, free_dim);
  const Eigen::Index keep = std::max<Eigen::Index>(k, std::min<Eigen::Index>(k + (m - k) / 2, m - 2));
  const double norm_est = std::max(h.norm_bound(), 1e-300);
  const double target = opts.tol * norm_est;

  std::mt19937_64 rng(seed);
  MatrixXd v(n, m);
  {
    VectorXd start = random_unit(n, rng);
    orthogonalize(start, v, 0, locked);
    v.col(0) = start.normalized();
  }
  MatrixXd t = MatrixXd::Zero(m, m);
  VectorXd residual_dir = VectorXd::Zero(n);
  double beta = 0.0;
  Eigen::Index filled = 0;
  double worst = INFINITY;

  for (int restart = 0; restart <= opts.max_restarts; ++restart) {
    for (Eigen::Index j = filled; j < m; ++j) {
      VectorXd w = multiply(h, v.col(j));
      const VectorXd proj = orthogonalize(w, v, j + 1, locked);
      t.block(0, j, j + 1, 1) = proj;
      t.block(j, 0, 1, j + 1) = proj.transpose();
      beta = w.norm();
      if (beta <= 1e-14 * norm_est) {
        // Invariant subspace: continue with a fresh direction.
        beta = 0.0;
        if (j + 1 + locked.cols() >= n) {
          m = j + 1;
          break;
        }
        w = random_unit(n, rng);
        orthogonalize(w, v, j + 1, locked);
        w.normalize();
      } else {
        w /= beta;
      }
      if (j + 1 < m) {
        v.col(j + 1) = w;
      } else {
        residual_dir = w;
      }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(t.topLeftCorner(m, m));
    const VectorXd& theta = es.eigenvalues();
    const MatrixXd& y = es.eigenvectors();
    worst = 0.0;
    for (int i = 0; i < k; ++i) worst = std::max(worst, std::abs(beta * y(m - 1, i)));
    const bool last = restart == opts.max_restarts;
    if (worst <= target || beta == 0.0 || last) {
      std::vector<Eigenpair> out;
      double true_worst = 0.0;
      for (int i = 0; i < k; ++i) {
        VectorXd x = v.leftCols(m) * y.col(i);
        x.normalize();
        fix_sign(x);
        const double r = residual_norm(h, x, theta(i));
        true_worst = std::max(true_worst, r);
        out.push_back({theta(i), to_state(x), r});
      }
      if (true_worst <= std::max(target, 1e-13 * norm_est) || (beta == 0.0 && true_worst <= 1e3 * target)) {
        return out;
      }
      if (last) {
        throw ConvergenceError("Lanczos did not converge after " + std::to_string(opts.max_restarts) +
                                   " restarts (residual " + std::to_string(true_worst) + ")",
                               true_worst);
      }
      worst = true_worst;
    }
    // Thick restart: keep the lowest Ritz vectors, continue from the residual.
    const Eigen::Index kept = std::min(keep, m - 1);
    const MatrixXd ritz = v.leftCols(m) * y.leftCols(kept);
    v.leftCols(kept) = ritz;
    v.col(kept) = residual_dir;
    t.setZero();
    for (Eigen::Index i = 0; i < kept; ++i) t(i, i) = theta(i);
    filled = kept;
  }
  throw ConvergenceError("Lanczos did not converge", worst);
}

}  // namespace

std::vector<Eigenpair> low_spectrum(const SparseOperator& h, int k, const EigenOptions& opts) {
  if (k < 1) throw DomainError("low_spectrum needs k >= 1");
  if (k > h.dim()) throw DomainError("more eigenpairs requested than the operator dimension");
  if (h.dim() <= opts.dense_threshold) return dense_lowest(h, k);

  auto found = thick_restart_lanczos(h, k, MatrixXd(h.dim(), 0), opts, opts.seed);
  // Single-vector Lanczos can miss copies of a degenerate eigenvalue; search
  // the complement of the converged vectors until nothing lower turns up.
  const double gap_tol = opts.degeneracy_tol * h.norm_bound();
  for (int check = 0; check < 4 * k + 4; ++check) {
    if (static_cast<int>(found.size()) + 1 > h.dim()) break;
    MatrixXd locked(h.dim(), static_cast<Eigen::Index>(found.size()));
    for (std::size_t c = 0; c < found.size(); ++c) {
      for (int i = 0; i < h.dim(); ++i) locked(i, static_cast<Eigen::Index>(c)) = found[c].state[static_cast<std::size_t>(i)].real();
    }
    auto extra = thick_restart_lanczos(h, 1, locked, opts, opts.seed + 1 + static_cast<std::uint64_t>(check));
    if (extra.front().energy >= found.back().energy - gap_tol) break;
    found.pop_back();
    found.push_back(std::move(extra.front()));
    std::sort(found.begin(), found.end(), [](const Eigenpair& a, const Eigenpair& b) { return a.energy < b.energy; });
  }
  return found;
}

Eigenpair ground_state(const SparseOperator& h, const EigenOptions& opts) {
  if (h.dim() < 1) throw DomainError("empty operator");
  if (h.dim() <= opts.dense_threshold) return dense_lowest(h, 1).front();
  return thick_restart_lanczos(h, 1, MatrixXd(h.dim(), 0), opts, opts.seed).front();
}

std::vector<double> dense_eigenvalues(const SparseOperator& h) {
  const auto n = static_cast<Eigen::Index>(h.dim());
  const auto dense = h.to_dense();
  const MatrixXd m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      dense.data(), n, n);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + n};
}

double principal_energy(int n, double a0, double J) {
  if (n < 1) throw DomainError("principal quantum number must be >= 1");
  if (!(a0 > 0.0)) throw DomainError("Bohr radius must be positive");
  const double d = 2.0 * n - 1.0;
  return -J / (a0 * a0 * d * d);
}

}  // namespace rdsim
