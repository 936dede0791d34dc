#include "rdsim/spectroscopy.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <thread>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs f(i) for i in [0, n) on `threads` workers; results are written by index.
template <class F>
void parallel_for(std::size_t n, int threads, F f) {
  const int workers = std::min<int>(std::max(1, threads), static_cast<int>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const int inner = std::max(1, omp_get_max_threads() / workers);
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      omp_set_num_threads(inner);
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
}

}  // namespace

void SpectroscopyParams::validate() const {
  if (!(drive > 0.0)) throw ValidationError("drive strength must be positive");
  if (!(total_time > 0.0)) throw ValidationError("total time must be positive");
  if (!(bohr_radius > 0.0)) throw ValidationError("bohr_radius must be positive");
  if (grid_points < 2 && omegas.empty()) throw ValidationError("frequency grid needs at least two points");
  if (levels < 2) throw ValidationError("at least two levels are needed");
  if (samples < 16) throw ValidationError("the Rabi fit needs at least 16 samples");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  for (double w : omegas) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("drive frequencies must be finite and >= 0");
  }
  if (nucleus.position.x < 0 || nucleus.position.y < 0 || nucleus.position.x > geometry.lx() - 1 ||
      nucleus.position.y > geometry.ly() - 1) {
    throw ValidationError("nucleus outside the lattice");
  }
}

FrequencyRecord drive_at(const SparseOperator& h0, const SparseOperator& h_lin, const StateVector& ground,
                         double omega, const SpectroscopyParams& p, double unbound_threshold,
                         std::vector<RabiSample>* trace) {
  Schedule drive;
  drive.then_sinusoid(p.total_time, p.drive, omega);
  const TimeDependentHamiltonian h({h0, h_lin}, {Schedule::constant(1.0), drive});
  EvolveOptions o = p.evolve;
  o.samples = p.samples;
  std::vector<RabiSample> samples;
  samples.reserve(static_cast<std::size_t>(p.samples) + 1);
  evolve(ground, h, 0.0, p.total_time, o,
         [&](double t, std::span<const Complex> psi) { samples.push_back({t, std::norm(inner(ground, psi))}); });
  const RabiFit fit = fit_rabi(samples);
  FrequencyRecord r;
  r.omega = omega;
  r.amplitude = fit.amplitude;
  r.rabi = fit.omega;
  r.residual = fit.residual;
  r.flat = fit.flat;
  r.unbound = omega > unbound_threshold;
  if (fit.residual > p.residual_limit) {
    r.fit_failed = true;
    r.amplitude = kNaN;
  }
  if (trace) *trace = std::move(samples);
  return r;
}

SpectroscopyResult spectroscopy_sweep(const SpectroscopyParams& p) {
  p.validate();
  const auto& g = p.geometry;
  const auto basis = SectorBasis::single_particle(g);
  const auto h0 = assemble_h0(basis, nuclear_field({p.nucleus}, g, p.bohr_radius, p.hopping, p.regularization),
                              p.hopping);
  const auto h_lin = assemble_linear_drive(basis, p.bohr_radius);

  SpectroscopyResult out;
  const auto levels = low_spectrum(h0, std::min(p.levels, h0.dim()), p.eigen);
  const StateVector& ground = levels.front().state;
  out.ground_energy = levels.front().energy;
  out.unbound_threshold = band_bottom(p.hopping) - out.ground_energy;
  for (std::size_t n = 0; n < levels.size(); ++n) {
    SpectralLevel l;
    l.index = static_cast<int>(n);
    l.energy = levels[n].energy;
    l.gap = l.energy - out.ground_energy;
    l.matrix_element = inner(levels[n].state, multiply(h_lin, ground)).real();
    l.label = classify_orbital(levels[n].state, g, p.nucleus.position);
    l.unbound = l.energy > band_bottom(p.hopping);
    out.levels.push_back(l);
    out.level_states.push_back(levels[n].state);
  }

  std::vector<double> grid = p.omegas;
  if (grid.empty()) {
    double top = p.hopping;
    for (const auto& l : out.levels) {
      if (!l.unbound) top = std::max(top, 1.05 * l.gap);
    }
    const int n = std::max(p.grid_points, static_cast<int>(std::ceil(p.grid_points * top / p.hopping)));
    for (int k = 0; k < n; ++k) grid.push_back(top * k / (n - 1));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<FrequencyRecord> records(grid.size());
  parallel_for(grid.size(), p.threads, [&](std::size_t i) {
    records[i] = drive_at(h0, h_lin, ground, grid[i], p, out.unbound_threshold);
  });

  // Local maxima of A on the grid, refined inside their bracketing neighbours.
  auto amp = [](const FrequencyRecord& r) { return std::isnan(r.amplitude) ? 0.0 : r.amplitude; };
  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double a = amp(records[i]);
    const double left = i > 0 ? amp(records[i - 1]) : -1.0;
    const double right = i + 1 < records.size() ? amp(records[i + 1]) : -1.0;
    if (a >= p.peak_threshold && a > left && a >= right) maxima.push_back(i);
  }
  std::vector<std::vector<FrequencyRecord>> extra(maxima.size());
  std::vector<double> peaks(maxima.size());
  parallel_for(maxima.size(), p.refine_peaks ? p.threads : 1, [&](std::size_t k) {
    const std::size_t i = maxima[k];
    if (!p.refine_peaks || records.size() < 3) {
      peaks[k] = grid[i];
      return;
    }
    const double lo = grid[i > 0 ? i - 1 : i];
    const double hi = grid[std::min(i + 1, grid.size() - 1)];
    const double scale = std::max(std::abs(hi), 1e-12);
    const int bits = std::clamp(static_cast<int>(std::ceil(1.0 - std::log2(p.refine_tol / scale))), 4, 40);
    auto objective = [&](double w) {
      auto r = drive_at(h0, h_lin, ground, w, p, out.unbound_threshold);
      r.refined = true;
      extra[k].push_back(r);
      return -amp(r);
    };
    const auto [w, neg_a] = boost::math::tools::brent_find_minima(objective, lo, hi, bits);
    peaks[k] = -neg_a >= amp(records[i]) ? w : grid[i];
  });
  for (auto& e : extra) records.insert(records.end(), e.begin(), e.end());
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.omega < b.omega; });
  out.records = std::move(records);
  out.peaks = peaks;
  std::sort(out.peaks.begin(), out.peaks.end());

  // Resonances: every level whose gap lies inside the scanned window.
  const double w_max = grid.back();
  std::vector<std::size_t> candidates;
  for (std::size_t n = 1; n < out.levels.size(); ++n) {
    if (out.levels[n].gap <= w_max) candidates.push_back(n);
  }
  std::vector<Resonance> res(candidates.size());
  parallel_for(candidates.size(), p.threads, [&](std::size_t c) {
    const auto& l = out.levels[candidates[c]];
    Resonance r;
    r.level = l.index;
    r.label = l.label;
    r.gap = l.gap;
    r.matrix_element = l.matrix_element;
    r.unbound = l.unbound;
    r.tolerance = 3.0 * p.drive * std::abs(l.matrix_element);
    r.on_gap_amplitude = drive_at(h0, h_lin, ground, l.gap, p, out.unbound_threshold).amplitude;
    r.peak_omega = kNaN;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < peaks.size(); ++k) {
      if (std::abs(peaks[k] - l.gap) < best) {
        best = std::abs(peaks[k] - l.gap);
        r.peak_omega = peaks[k];
        r.peak_amplitude = amp(out.records[0]);  // replaced below
      }
    }
    if (!std::isnan(r.peak_omega)) {
      for (const auto& rec : out.records) {
        if (rec.omega == r.peak_omega) r.peak_amplitude = amp(rec);
      }
      r.within_tolerance = best <= r.tolerance;
    }
    res[c] = r;
  });
  out.resonances = std::move(res);
  return out;
}

}  // namespace rdsim
