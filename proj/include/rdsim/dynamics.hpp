#pragma once

#include <functional>
#include <span>
#include <vector>

#include "rdsim/operators.hpp"
#include "rdsim/state.hpp"

namespace rdsim {

enum class RampShape { sin4_up, sin4_down, constant, sinusoid };

// One piece of a schedule on [t_start, t_end]. Ramps move from start_value to
// end_value; sin4_up follows sin^4(pi*tau/2) in tau = (t - t_start)/duration and
// sin4_down is its mirror image in time. A sinusoid is
// start_value * sin(omega * t + phase) in absolute time.
struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  RampShape shape = RampShape::constant;
  double start_value = 0.0;
  double end_value = 0.0;
  double omega = 0.0;
  double phase = 0.0;
};

// Scalar coefficient s(t) built from contiguous segments; clamped outside.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<Segment> segments);

  static Schedule constant(double value);

  // Appends a segment starting where the previous one ended (or at t0 = 0).
  Schedule& then(RampShape shape, double duration, double start_value, double end_value);
  Schedule& then_sinusoid(double duration, double amplitude, double omega, double phase = 0.0);
  Schedule& hold(double duration, double value) { return then(RampShape::constant, duration, value, value); }

  double value(double t) const;
  double t_begin() const noexcept;
  double t_end() const noexcept;
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  // s'(t) = s(t0 + t1 - t): the same path traversed backwards in time.
  Schedule reversed(double t0, double t1) const;

 private:
  std::vector<Segment> segments_;
};

double schedule_value(const Schedule& s, double t);

// H(t) = sum_k s_k(t) H_k with static sparse parts.
class TimeDependentHamiltonian {
 public:
  TimeDependentHamiltonian(std::vector<SparseOperator> parts, std::vector<Schedule> schedules);

  int dim() const noexcept { return sum_.dim(); }
  std::size_t size() const noexcept { return schedules_.size(); }
  const SparseOperator& part(std::size_t k) const { return sum_.part(k); }
  const Schedule& schedule(std::size_t k) const { return schedules_.at(k); }

  std::vector<double> coefficients(double t) const;
  SparseOperator at(double t) const;
  // Operator with explicit coefficients over the shared pattern.
  void combine_into(std::span<const double> coeffs, SparseOperator& out) const {
    sum_.combine_into(coeffs, out);
  }
  SparseOperator combine(std::span<const double> coeffs) const { return sum_.combine(coeffs); }

  // Every schedule mirrored about the interval [t0, t1].
  TimeDependentHamiltonian reversed(double t0, double t1) const;

 private:
  OperatorSum sum_;
  std::vector<Schedule> schedules_;
};

enum class Propagator {
  midpoint,  // exponential midpoint rule, second order
  magnus4,   // two-exponential commutator-free Magnus, fourth order
};

struct EvolveOptions {
  Propagator scheme = Propagator::midpoint;
  double max_step = 0.05;
  int steps_per_period = 40;
  int min_steps_per_ramp = 50;
  double min_step = 1e-9;
  // Krylov truncation error per exponential, absolute.
  double krylov_tol = 1e-12;
  int max_krylov_dim = 30;
  // Observer calls at t0 + k (t1 - t0) / samples, k = 0..samples.
  int samples = 200;
};

struct EvolveStats {
  long steps = 0;
  long matvecs = 0;
  double max_norm_drift = 0.0;
};

using Observer = std::function<void(double t, std::span<const Complex> psi)>;

// Time-ordered evolution from t0 to t1 (t1 < t0 runs backwards, applying the
// inverse propagator).
StateVector evolve(std::span<const Complex> psi0, const TimeDependentHamiltonian& h, double t0,
                   double t1, const EvolveOptions& opts = {}, const Observer& observer = {},
                   EvolveStats* stats = nullptr);

struct ConvergedEvolution {
  StateVector state;
  double step = 0.0;           // step size of the accepted run
  double halving_change = 0.0; // 1 - |<psi_dt|psi_dt/2>|^2
  EvolveStats stats;
};

// Repeats the evolution with halved max_step until the final state changes by
// at most step_tol in fidelity; throws StiffnessError below min_step.
ConvergedEvolution evolve_converged(std::span<const Complex> psi0, const TimeDependentHamiltonian& h,
                                    double t0, double t1, double step_tol,
                                    EvolveOptions opts = {});

// exp(-i tau H) psi by Lanczos; returns false if the Krylov error exceeds tol
// at max_dim (psi is left unchanged then).
bool krylov_expv(const SparseOperator& h, std::span<Complex> psi, double tau, double tol, int max_dim,
                 long* matvecs = nullptr);

}  // namespace rdsim
