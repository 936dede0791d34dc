#include "rdsim/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

double sin4(double x) {
  const double s = std::sin(x);
  return s * s * s * s;
}

double segment_value(const Segment& s, double t) {
  const double duration = s.t_end - s.t_start;
  const double tau = duration > 0.0 ? std::clamp((t - s.t_start) / duration, 0.0, 1.0) : 1.0;
  switch (s.shape) {
    case RampShape::constant:
      return s.start_value;
    case RampShape::sin4_up:
      return s.start_value + (s.end_value - s.start_value) * sin4(0.5 * std::numbers::pi * tau);
    case RampShape::sin4_down:
      return s.end_value + (s.start_value - s.end_value) * sin4(0.5 * std::numbers::pi * (1.0 - tau));
    case RampShape::sinusoid:
      return s.start_value * std::sin(s.omega * t + s.phase);
  }
  return 0.0;
}

}  // namespace

Schedule::Schedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!std::isfinite(s.t_start) || !std::isfinite(s.t_end) || !std::isfinite(s.start_value) ||
        !std::isfinite(s.end_value) || !std::isfinite(s.omega) || !std::isfinite(s.phase)) {
      throw DomainError("schedule segment with non-finite entries");
    }
    if (s.t_end < s.t_start) throw DomainError("schedule segment ends before it starts");
    if (i > 0 && s.t_start != segments_[i - 1].t_end) {
      throw DomainError("schedule segments must be contiguous");
    }
  }
}

Schedule Schedule::constant(double value) {
  return Schedule({Segment{0.0, 0.0, RampShape::constant, value, value}});
}

Schedule& Schedule::then(RampShape shape, double duration, double start_value, double end_value) {
  if (!(duration >= 0.0)) throw DomainError("segment duration must be >= 0");
  if (shape == RampShape::sinusoid) throw DomainError("use then_sinusoid for oscillating segments");
  const double t0 = segments_.empty() ? 0.0 : segments_.back().t_end;
  auto segs = segments_;
  segs.push_back({t0, t0 + duration, shape, start_value, end_value});
  *this = Schedule(std::move(segs));
  return *this;
}

Schedule& Schedule::then_sinusoid(double duration, double amplitude, double omega, double phase) {
  if (!(duration >= 0.0)) throw DomainError("segment duration must be >= 0");
  const double t0 = segments_.empty() ? 0.0 : segments_.back().t_end;
  auto segs = segments_;
  segs.push_back({t0, t0 + duration, RampShape::sinusoid, amplitude, amplitude, omega, phase});
  *this = Schedule(std::move(segs));
  return *this;
}

double Schedule::value(double t) const {
  if (segments_.empty()) return 0.0;
  if (t <= segments_.front().t_start) return segment_value(segments_.front(), segments_.front().t_start);
  for (const auto& s : segments_) {
    if (t <= s.t_end) return segment_value(s, t);
  }
  return segment_value(segments_.back(), segments_.back().t_end);
}

double Schedule::t_begin() const noexcept { return segments_.empty() ? 0.0 : segments_.front().t_start; }
double Schedule::t_end() const noexcept { return segments_.empty() ? 0.0 : segments_.back().t_end; }

Schedule Schedule::reversed(double t0, double t1) const {
  // Extend the clamped ends so the mirrored schedule covers [t0, t1].
  std::vector<Segment> src;
  if (!segments_.empty() && t0 < t_begin()) {
    const double v = value(t_begin());
    src.push_back({t0, t_begin(), RampShape::constant, v, v});
  }
  src.insert(src.end(), segments_.begin(), segments_.end());
  if (!segments_.empty() && t1 > t_end()) {
    const double v = value(t_end());
    src.push_back({t_end(), t1, RampShape::constant, v, v});
  }
  if (src.empty()) return {};
  std::vector<Segment> out;
  for (auto it = src.rbegin(); it != src.rend(); ++it) {
    Segment s = *it;
    const double a = t0 + t1 - it->t_end;
    const double b = t0 + t1 - it->t_start;
    s.t_start = a;
    s.t_end = b;
    switch (it->shape) {
      case RampShape::constant:
        break;
      case RampShape::sin4_up:
        s.shape = RampShape::sin4_down;
        s.start_value = it->end_value;
        s.end_value = it->start_value;
        break;
      case RampShape::sin4_down:
        s.shape = RampShape::sin4_up;
        s.start_value = it->end_value;
        s.end_value = it->start_value;
        break;
      case RampShape::sinusoid:
        // A sin(w (t0 + t1 - t) + p) = A sin(-w t + (w (t0 + t1) + p)).
        s.omega = -it->omega;
        s.phase = it->omega * (t0 + t1) + it->phase;
        break;
    }
    out.push_back(s);
  }
  return Schedule(std::move(out));
}

double schedule_value(const Schedule& s, double t) { return s.value(t); }

TimeDependentHamiltonian::TimeDependentHamiltonian(std::vector<SparseOperator> parts,
                                                   std::vector<Schedule> schedules)
    : sum_(std::move(parts)), schedules_(std::move(schedules)) {
  if (schedules_.size() != sum_.size()) throw ShapeError("one schedule per Hamiltonian part required");
}

std::vector<double> TimeDependentHamiltonian::coefficients(double t) const {
  std::vector<double> c(schedules_.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = schedules_[k].value(t);
  return c;
}

SparseOperator TimeDependentHamiltonian::at(double t) const { return sum_.combine(coefficients(t)); }

TimeDependentHamiltonian TimeDependentHamiltonian::reversed(double t0, double t1) const {
  std::vector<SparseOperator> parts;
  std::vector<Schedule> schedules;
  for (std::size_t k = 0; k < size(); ++k) {
    parts.push_back(part(k));
    schedules.push_back(schedules_[k].reversed(t0, t1));
  }
  return {std::move(parts), std::move(schedules)};
}

bool krylov_expv(const SparseOperator& h, std::span<Complex> psi, double tau, double tol, int max_dim,
                 long* matvecs) {
  const auto n = psi.size();
  if (n != static_cast<std::size_t>(h.dim())) throw ShapeError("state and operator dimensions differ");
  const double beta0 = norm(psi);
  if (beta0 == 0.0 || tau == 0.0) return true;
  max_dim = std::max(1, std::min<int>(max_dim, static_cast<int>(n)));

  // Krylov basis kept per thread so repeated steps reuse the same pages.
  thread_local std::vector<StateVector> v;
  if (v.size() < static_cast<std::size_t>(max_dim) + 1) v.resize(static_cast<std::size_t>(max_dim) + 1);
  for (auto& q : v) {
    if (q.size() != n) q.assign(n, Complex(0.0));
  }
  {
    const double inv = 1.0 / beta0;
    Complex* v0 = v[0].data();
    for (std::size_t i = 0; i < n; ++i) v0[i] = psi[i] * inv;
  }
  std::vector<double> alpha;
  std::vector<double> beta;
  Eigen::VectorXcd coeffs;

  for (int j = 0; j < max_dim; ++j) {
    Complex* w = v[static_cast<std::size_t>(j) + 1].data();
    const Complex* vj = v[static_cast<std::size_t>(j)].data();
    const Complex* vp = j > 0 ? v[static_cast<std::size_t>(j) - 1].data() : nullptr;
    h.apply(v[static_cast<std::size_t>(j)], v[static_cast<std::size_t>(j) + 1]);
    if (matvecs) ++*matvecs;
    double a = 0.0;
    for (std::size_t i = 0; i < n; ++i) a += vj[i].real() * w[i].real() + vj[i].imag() * w[i].imag();
    alpha.push_back(a);
    // Three-term recurrence, then a second pass against the two most recent
    // vectors. Short-time expansions stop well before global loss of
    // orthogonality sets in, and a full sweep would stream the whole basis.
    const double bprev = j > 0 ? beta.back() : 0.0;
    Complex cj(0.0), cp(0.0);
    if (vp) {
      for (std::size_t i = 0; i < n; ++i) {
        w[i] -= a * vj[i] + bprev * vp[i];
        cj += std::conj(vj[i]) * w[i];
        cp += std::conj(vp[i]) * w[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        w[i] -= a * vj[i];
        cj += std::conj(vj[i]) * w[i];
      }
    }
    double bb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] -= cj * vj[i] + (vp ? cp * vp[i] : Complex(0.0));
      bb += std::norm(w[i]);
    }
    const double b = std::sqrt(bb);
    const int m = j + 1;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[static_cast<std::size_t>(i)];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    const Eigen::VectorXd& lam = es.eigenvalues();
    const Eigen::MatrixXd& u = es.eigenvectors();
    Eigen::VectorXcd phases(m);
    for (int i = 0; i < m; ++i) phases(i) = std::exp(Complex(0.0, -tau * lam(i))) * u(0, i);
    coeffs = u.cast<Complex>() * phases;
    const bool exhausted = b <= 1e-14 * std::max(1.0, std::abs(lam(0)) + std::abs(lam(m - 1)));
    const double err = beta0 * b * std::abs(coeffs(m - 1));
    if (exhausted || err <= tol) {
      std::fill(psi.begin(), psi.end(), Complex(0.0));
      for (int q = 0; q < m; ++q) {
        const Complex c = beta0 * coeffs(q);
        const Complex* vq = v[static_cast<std::size_t>(q)].data();
        for (std::size_t i = 0; i < n; ++i) psi[i] += c * vq[i];
      }
      return true;
    }
    beta.push_back(b);
    const double inv = 1.0 / b;
    for (std::size_t i = 0; i < n; ++i) w[i] *= inv;
  }
  return false;
}

namespace {

// Largest admissible step inside [a, b] given the active schedule segments.
double step_limit(const TimeDependentHamiltonian& h, double a, double b, const EvolveOptions& opts) {
  double limit = opts.max_step;
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  for (std::size_t k = 0; k < h.size(); ++k) {
    for (const auto& s : h.schedule(k).segments()) {
      if (s.t_end <= lo || s.t_start >= hi) continue;
      const double duration = s.t_end - s.t_start;
      if (s.shape == RampShape::sinusoid && s.omega != 0.0 && s.start_value != 0.0) {
        limit = std::min(limit, 2.0 * std::numbers::pi / (opts.steps_per_period * std::abs(s.omega)));
      } else if ((s.shape == RampShape::sin4_up || s.shape == RampShape::sin4_down) &&
                 s.start_value != s.end_value && duration > 0.0) {
        limit = std::min(limit, duration / opts.min_steps_per_ramp);
      }
    }
  }
  return limit;
}

struct Stepper {
  const TimeDependentHamiltonian& h;
  const EvolveOptions& opts;
  EvolveStats& stats;
  SparseOperator work;
  std::vector<double> c1, c2, mix;

  // Advances psi from t by dt (signed); splits the step if the Krylov
  // exponential does not converge.
  void step(std::span<Complex> psi, double t, double dt) {
    if (std::abs(dt) < opts.min_step) {
      throw StiffnessError("time step fell below " + std::to_string(opts.min_step) + " at t = " +
                           std::to_string(t));
    }
    StateVector backup(psi.begin(), psi.end());
    bool ok = true;
    if (opts.scheme == Propagator::midpoint) {
      mix = h.coefficients(t + 0.5 * dt);
      h.combine_into(mix, work);
      ok = krylov_expv(work, psi, dt, opts.krylov_tol, opts.max_krylov_dim, &stats.matvecs);
    } else {
      const double r3 = std::sqrt(3.0);
      const double a1 = (3.0 - 2.0 * r3) / 12.0;
      const double a2 = (3.0 + 2.0 * r3) / 12.0;
      c1 = h.coefficients(t + (0.5 - r3 / 6.0) * dt);
      c2 = h.coefficients(t + (0.5 + r3 / 6.0) * dt);
      mix.resize(c1.size());
      for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = a2 * c1[k] + a1 * c2[k];
      h.combine_into(mix, work);
      ok = krylov_expv(work, psi, dt, opts.krylov_tol, opts.max_krylov_dim, &stats.matvecs);
      if (ok) {
        for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = a1 * c1[k] + a2 * c2[k];
        h.combine_into(mix, work);
        ok = krylov_expv(work, psi, dt, opts.krylov_tol, opts.max_krylov_dim, &stats.matvecs);
      }
    }
    if (ok) {
      ++stats.steps;
      return;
    }
    std::copy(backup.begin(), backup.end(), psi.begin());
    step(psi, t, 0.5 * dt);
    step(psi, t + 0.5 * dt, 0.5 * dt);
  }
};

}  // namespace

StateVector evolve(std::span<const Complex> psi0, const TimeDependentHamiltonian& h, double t0, double t1,
                   const EvolveOptions& opts, const Observer& observer, EvolveStats* stats) {
  if (psi0.size() != static_cast<std::size_t>(h.dim())) throw ShapeError("initial state dimension mismatch");
  if (!(opts.max_step > 0.0) || opts.samples < 1 || opts.steps_per_period < 1 || opts.min_steps_per_ramp < 1) {
    throw DomainError("invalid evolution options");
  }
  EvolveStats local;
  EvolveStats& st = stats ? *stats : local;
  st = {};
  StateVector psi(psi0.begin(), psi0.end());
  const double n0 = norm(psi);

  // Breakpoints: sample times and every schedule segment boundary in between.
  std::vector<double> marks;
  for (int k = 0; k <= opts.samples; ++k) marks.push_back(t0 + (t1 - t0) * k / opts.samples);
  const double lo = std::min(t0, t1);
  const double hi = std::max(t0, t1);
  for (std::size_t k = 0; k < h.size(); ++k) {
    for (const auto& s : h.schedule(k).segments()) {
      for (double b : {s.t_start, s.t_end}) {
        if (b > lo && b < hi) marks.push_back(b);
      }
    }
  }
  const bool forward = t1 >= t0;
  std::sort(marks.begin(), marks.end(), [forward](double a, double b) { return forward ? a < b : a > b; });
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  std::vector<double> sample_times;
  for (int k = 0; k <= opts.samples; ++k) sample_times.push_back(t0 + (t1 - t0) * k / opts.samples);
  std::size_t next_sample = 0;
  auto maybe_observe = [&](double t) {
    while (next_sample < sample_times.size() && sample_times[next_sample] == t) {
      if (observer) observer(t, psi);
      ++next_sample;
    }
  };

  Stepper stepper{h, opts, st, {}, {}, {}, {}};
  maybe_observe(marks.front());
  for (std::size_t m = 0; m + 1 < marks.size(); ++m) {
    const double a = marks[m];
    const double b = marks[m + 1];
    const double limit = step_limit(h, a, b, opts);
    const long n_steps = std::max<long>(1, static_cast<long>(std::ceil(std::abs(b - a) / limit - 1e-9)));
    const double dt = (b - a) / static_cast<double>(n_steps);
    for (long s = 0; s < n_steps; ++s) {
      stepper.step(psi, a + s * dt, s + 1 == n_steps ? b - (a + s * dt) : dt);
      st.max_norm_drift = std::max(st.max_norm_drift, std::abs(norm(psi) - n0));
    }
    maybe_observe(b);
  }
  return psi;
}

ConvergedEvolution evolve_converged(std::span<const Complex> psi0, const TimeDependentHamiltonian& h,
                                    double t0, double t1, double step_tol, EvolveOptions opts) {
  opts.samples = 1;
  EvolveStats coarse_stats;
  StateVector coarse = evolve(psi0, h, t0, t1, opts, {}, &coarse_stats);
  while (true) {
    EvolveOptions fine_opts = opts;
    fine_opts.max_step = 0.5 * opts.max_step;
    fine_opts.steps_per_period = 2 * opts.steps_per_period;
    fine_opts.min_steps_per_ramp = 2 * opts.min_steps_per_ramp;
    if (fine_opts.max_step < opts.min_step) {
      throw StiffnessError("step halving did not converge above the minimum step");
    }
    EvolveStats fine_stats;
    StateVector fine = evolve(psi0, h, t0, t1, fine_opts, {}, &fine_stats);
    const double change = 1.0 - fidelity(coarse, fine);
    if (change <= step_tol) return {std::move(fine), fine_opts.max_step, change, fine_stats};
    opts = fine_opts;
    coarse = std::move(fine);
  }
}

}  // namespace rdsim
