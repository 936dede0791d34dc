#include "rdsim/protocols.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

NucleusSpec nucleus_at(SiteCoord c, double charge, double scale = 1.0) {
  return {{static_cast<double>(c.x), static_cast<double>(c.y)}, charge, scale};
}

int site_of(const LatticeGeometry& g, SiteCoord c) { return g.site_index(c); }

// |psi_2p| of the first nucleus's one-particle problem, with the degenerate
// pair rotated onto the requested axis.
std::vector<double> orbital_bias(const PrepParams& p) {
  const auto& g = p.geometry;
  const auto field = nuclear_field({p.nuclei.front()}, g, p.bohr_radius, p.hopping, p.regularization);
  const auto h1 = assemble_h0(SectorBasis::single_particle(g), field, p.hopping);
  const auto levels = low_spectrum(h1, 3, p.eigen);
  const Point2 c = p.nuclei.front().position;
  std::vector<double> orbital(static_cast<std::size_t>(g.num_sites()), 0.0);
  for (int k = 1; k <= 2; ++k) {
    const auto& phi = levels[static_cast<std::size_t>(k)].state;
    double dipole = 0.0;
    for (int i = 0; i < g.num_sites(); ++i) {
      const auto s = g.site_coord(i);
      dipole += phi[static_cast<std::size_t>(i)].real() * (p.bias_axis_x ? s.x - c.x : s.y - c.y);
    }
    for (int i = 0; i < g.num_sites(); ++i) {
      orbital[static_cast<std::size_t>(i)] += dipole * phi[static_cast<std::size_t>(i)].real();
    }
  }
  const double depth = *std::max_element(field.begin(), field.end());
  return orbital_bias_field(orbital, *p.orbital_bias_fraction * depth);
}

double expectation_or_zero(const SparseOperator& op, std::span<const Complex> psi) {
  return op.dim() == 0 ? 0.0 : expectation(op, psi);
}

// Ground multiplet of the target Hamiltonian.
struct Target {
  double energy = 0.0;
  std::vector<StateVector> states;
};

Target target_multiplet(const SparseOperator& h, const EigenOptions& eig) {
  const int k = std::min(3, h.dim());
  auto levels = low_spectrum(h, k, eig);
  Target t;
  t.energy = levels.front().energy;
  const double tol = 1e-8 * std::max(1.0, std::abs(t.energy));
  for (auto& l : levels) {
    if (l.energy - t.energy <= tol) t.states.push_back(std::move(l.state));
  }
  return t;
}

double multiplet_weight(const Target& t, std::span<const Complex> psi) {
  double w = 0.0;
  const double n2 = std::pow(norm(psi), 2);
  for (const auto& s : t.states) w += std::norm(inner(s, psi));
  return w / n2;
}

}  // namespace

const char* to_string(PrepKind k) noexcept {
  switch (k) {
    case PrepKind::bosonic_helium: return "bosonic_helium";
    case PrepKind::fermionic_helium: return "fermionic_helium";
    case PrepKind::hydrogen2: return "hydrogen2";
    case PrepKind::custom: return "custom";
  }
  return "custom";
}

void PrepParams::validate() const {
  auto fail = [](const std::string& m) { throw ValidationError(m); };
  if (nuclei.empty()) fail("at least one nucleus is required");
  if (!(bohr_radius > 0.0)) fail("bohr_radius must be positive");
  if (!(hopping > 0.0)) fail("hopping must be positive");
  if (!(ramp_time >= 0.0) || !(interaction_time >= 0.0) || !(aux_ramp_time >= 0.0)) {
    fail("ramp times must be >= 0");
  }
  if (symmetry == Exchange::distinguishable) fail("preparation runs in the symmetric or antisymmetric sector");
  for (const auto& n : nuclei) {
    if (n.position.x < 0 || n.position.y < 0 || n.position.x > geometry.lx() - 1 || n.position.y > geometry.ly() - 1) {
      fail("nucleus outside the lattice");
    }
  }
  if (!geometry.contains(first_site) || !geometry.contains(second_site)) fail("initial site outside the lattice");
  if (symmetry == Exchange::antisymmetric && first_site == second_site) {
    fail("antisymmetric sector needs two distinct initial sites");
  }
  if (aux_scale && !(*aux_scale > 0.0)) fail("auxiliary nucleus scale must be positive");
  if (orbital_bias_fraction && !(*orbital_bias_fraction > 0.0)) fail("orbital bias fraction must be positive");
  if (instantaneous_stride < 0) fail("instantaneous_stride must be >= 0");
  try {
    interaction.validate();
  } catch (const std::exception& e) {
    fail(e.what());
  }
  if (dressing) {
    try {
      dressing->validate();
    } catch (const std::exception& e) {
      fail(e.what());
    }
  }
}

double PrepParams::noninteracting_time() const noexcept {
  if (start_from_ground_state) return 0.0;
  return ramp_time + (aux_scale ? aux_ramp_time : 0.0);
}

double PrepParams::total_time() const noexcept { return noninteracting_time() + interaction_time; }

PrepParams bosonic_helium_params(int padding) {
  PrepParams p;
  p.kind = PrepKind::bosonic_helium;
  p.geometry = LatticeGeometry::from_padding(padding);
  const SiteCoord c{padding, padding};
  p.bohr_radius = 4.0;
  p.nuclei = {nucleus_at(c, 2.0)};
  p.interaction = {default_vint(p.bohr_radius, 6.0, p.hopping), 6.0, 2.0, {}};
  p.symmetry = Exchange::symmetric;
  p.ramp_time = 200.0;
  p.interaction_time = 20.0;
  p.first_site = c;
  p.second_site = c;
  return p;
}

PrepParams fermionic_helium_params(int padding) {
  PrepParams p = bosonic_helium_params(padding);
  p.kind = PrepKind::fermionic_helium;
  p.symmetry = Exchange::antisymmetric;
  p.ramp_time = 140.0;
  p.aux_ramp_time = 60.0;
  p.interaction_time = 10.0;
  p.second_site = {padding + 3, padding};
  p.aux_scale = 0.9;
  p.orbital_bias_fraction = 0.01;
  return p;
}

PrepParams h2_params(Exchange symmetry, int separation, int padding) {
  if (separation < 1) throw ValidationError("nucleus separation must be >= 1");
  PrepParams p;
  p.kind = PrepKind::hydrogen2;
  p.geometry = LatticeGeometry(2 * padding + 1 + separation, 2 * padding + 1);
  p.bohr_radius = 2.0;
  p.first_site = {padding, padding};
  p.second_site = {padding + separation, padding};
  p.nuclei = {nucleus_at(p.first_site, 1.0), nucleus_at(p.second_site, 1.0)};
  p.interaction = {default_vint(p.bohr_radius, 6.0, p.hopping), 6.0, 2.0, {}};
  p.symmetry = symmetry;
  p.ramp_time = 200.0;
  p.interaction_time = 10.0;
  return p;
}

SparseOperator HamiltonianParts::total() const {
  SparseOperator h = kinetic + potential;
  if (interaction.dim() != 0) h = h + interaction;
  return h;
}

EnergyComponents measure_energy_components(std::span<const Complex> psi, const HamiltonianParts& parts) {
  if (psi.size() != static_cast<std::size_t>(parts.kinetic.dim()) ||
      parts.potential.dim() != parts.kinetic.dim() ||
      (parts.interaction.dim() != 0 && parts.interaction.dim() != parts.kinetic.dim())) {
    throw ShapeError("energy components need operators on the state's basis");
  }
  EnergyComponents e;
  e.kinetic = expectation(parts.kinetic, psi);
  e.potential = expectation(parts.potential, psi);
  e.interaction = expectation_or_zero(parts.interaction, psi);
  e.total = e.kinetic + e.potential + e.interaction;
  return e;
}

PrepPlan build_prep_plan(const PrepParams& p) {
  p.validate();
  const auto& g = p.geometry;
  auto basis = SectorBasis::two_particle(g, p.symmetry);
  const double t_ramp = p.start_from_ground_state ? 0.0 : p.ramp_time;
  const double t_aux = p.start_from_ground_state || !p.aux_scale ? 0.0 : p.aux_ramp_time;
  const double t_int0 = t_ramp + t_aux;
  const double t_end = t_int0 + p.interaction_time;

  std::vector<SparseOperator> parts;
  std::vector<Schedule> schedules;
  std::vector<PartKind> kinds;

  const auto hop = assemble_hopping(basis, p.hopping);
  const auto nuc = assemble_site_diagonal(
                       basis, nuclear_field(p.nuclei, g, p.bohr_radius, p.hopping, p.regularization))
                       .scaled(-1.0);
  const auto vint = assemble_interaction(basis, p.interaction);

  Schedule hop_schedule;
  if (p.start_from_ground_state) {
    hop_schedule = Schedule::constant(1.0);
  } else {
    hop_schedule.then(RampShape::sin4_up, t_ramp, 0.0, 1.0).hold(t_end - t_ramp, 1.0);
  }
  parts.push_back(hop);
  schedules.push_back(hop_schedule);
  kinds.push_back(PartKind::kinetic);
  parts.push_back(nuc);
  schedules.push_back(Schedule::constant(1.0));
  kinds.push_back(PartKind::potential);

  if (p.aux_scale && !p.start_from_ground_state) {
    const auto& n0 = p.nuclei.front();
    const auto aux = nucleus_at(p.second_site, n0.charge, n0.strength_scale * *p.aux_scale);
    parts.push_back(assemble_site_diagonal(basis, nuclear_field({aux}, g, p.bohr_radius, p.hopping, p.regularization))
                        .scaled(-1.0));
    Schedule s;
    s.hold(t_ramp, 1.0).then(RampShape::sin4_down, t_aux, 1.0, 0.0).hold(p.interaction_time, 0.0);
    schedules.push_back(s);
    kinds.push_back(PartKind::potential);
  }

  SparseOperator bias;
  if (p.orbital_bias_fraction) {
    bias = assemble_site_diagonal(basis, orbital_bias(p)).scaled(-1.0);
    parts.push_back(bias);
    Schedule s;
    s.hold(t_int0, 1.0).then(RampShape::sin4_down, p.interaction_time, 1.0, 0.0);
    schedules.push_back(s);
    kinds.push_back(PartKind::potential);
  }

  const std::size_t interaction_part = parts.size();
  parts.push_back(vint);
  Schedule int_schedule;
  int_schedule.hold(t_int0, 0.0).then(RampShape::sin4_up, p.interaction_time, 0.0, 1.0);
  schedules.push_back(int_schedule);
  kinds.push_back(PartKind::interaction);

  StateVector initial;
  if (p.start_from_ground_state) {
    SparseOperator h_free = hop + nuc;
    if (bias.dim() != 0) h_free = h_free + bias;
    initial = ground_state(h_free, p.eigen).state;
  } else {
    initial = basis_state(basis, site_of(g, p.first_site), site_of(g, p.second_site));
  }

  HamiltonianParts final_parts{hop, nuc, vint};
  return PrepPlan{std::move(basis),
                  TimeDependentHamiltonian(std::move(parts), std::move(schedules)),
                  std::move(kinds),
                  interaction_part,
                  std::move(final_parts),
                  std::move(initial),
                  t_end,
                  t_int0};
}

RunResult prepare(const PrepParams& p) {
  const PrepPlan plan = build_prep_plan(p);
  const auto& h = plan.hamiltonian;
  const Target target = target_multiplet(plan.final_parts.total(), p.eigen);

  RunResult r;
  r.kind = p.kind;
  r.symmetry = p.symmetry;
  r.exact_energy = target.energy;
  r.ground_degeneracy = static_cast<int>(target.states.size());
  r.interaction_start = plan.interaction_start;
  r.t_end = plan.t_end;

  int sample_index = 0;
  const Observer observe = [&](double t, std::span<const Complex> psi) {
    TrajectorySample s;
    s.t = t;
    s.norm = norm(psi);
    s.fidelity_target = multiplet_weight(target, psi);
    s.fidelity_instantaneous = kNaN;
    if (p.instantaneous_stride > 0 && sample_index % p.instantaneous_stride == 0) {
      try {
        const auto gs = ground_state(h.at(t), p.eigen);
        s.fidelity_instantaneous = fidelity(gs.state, psi);
      } catch (const ConvergenceError&) {
      }
    }
    const auto c = h.coefficients(t);
    for (std::size_t k = 0; k < h.size(); ++k) {
      if (c[k] == 0.0) continue;
      const double e = c[k] * expectation(h.part(k), psi);
      switch (plan.kinds[k]) {
        case PartKind::kinetic: s.energy.kinetic += e; break;
        case PartKind::potential: s.energy.potential += e; break;
        case PartKind::interaction: s.energy.interaction += e; break;
      }
    }
    s.energy.total = s.energy.kinetic + s.energy.potential + s.energy.interaction;
    r.trajectory.push_back(s);
    ++sample_index;
  };

  r.final_state = evolve(plan.initial, h, 0.0, plan.t_end, p.evolve, observe, &r.stats);
  r.step_halving_change = kNaN;
  if (p.verify_step && plan.t_end > 0.0) {
    EvolveOptions fine = p.evolve;
    fine.max_step *= 0.5;
    fine.steps_per_period *= 2;
    fine.min_steps_per_ramp *= 2;
    fine.samples = 1;
    const auto check = evolve(plan.initial, h, 0.0, plan.t_end, fine);
    r.step_halving_change = 1.0 - fidelity(check, r.final_state);
  }

  r.final_fidelity = multiplet_weight(target, r.final_state);
  r.final_energy = measure_energy_components(r.final_state, plan.final_parts);
  const double e_ref = plan.basis.particle_count() * band_bottom(p.hopping);
  const double err = std::abs(r.final_energy.total - r.exact_energy);
  r.relative_error = err / std::abs(r.exact_energy - e_ref);
  r.relative_error_absolute = err / std::abs(r.exact_energy);

  r.exposure = dressed_time(h.schedule(plan.interaction_part), 0.0, plan.t_end);
  if (p.dressing) r.dressing = dressing_report(*p.dressing, r.exposure);
  return r;
}

RunResult prepare_bosonic_helium(const PrepParams& p) {
  if (p.symmetry != Exchange::symmetric) throw ValidationError("bosonic helium runs in the symmetric sector");
  if (p.nuclei.size() != 1) throw ValidationError("helium has a single nucleus");
  return prepare(p);
}

RunResult prepare_fermionic_helium(const PrepParams& p) {
  if (p.symmetry != Exchange::antisymmetric) throw ValidationError("fermionic helium runs in the antisymmetric sector");
  if (p.nuclei.size() != 1) throw ValidationError("helium has a single nucleus");
  return prepare(p);
}

RunResult prepare_h2(const PrepParams& p, Exchange symmetry) {
  if (p.nuclei.size() != 2) throw ValidationError("the molecule needs two nuclei");
  PrepParams q = p;
  q.symmetry = symmetry;
  return prepare(q);
}

double reverse_prep_return_probability(const RunResult& run, const PrepParams& p) {
  const PrepPlan plan = build_prep_plan(p);
  if (run.final_state.size() != static_cast<std::size_t>(plan.basis.dim())) {
    throw ShapeError("run does not match the preparation parameters");
  }
  if (plan.t_end == 0.0) return fidelity(plan.initial, run.final_state);
  EvolveOptions o = p.evolve;
  o.samples = 1;
  const auto back = evolve(run.final_state, plan.hamiltonian.reversed(0.0, plan.t_end), 0.0, plan.t_end, o);
  return fidelity(plan.initial, back);
}

std::vector<BondPoint> bond_scan(const PrepParams& base, const std::vector<int>& separations,
                                 const std::vector<double>& interaction_times, int threads, int padding) {
  if (base.nuclei.empty()) throw ValidationError("bond scan needs a nucleus charge");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  std::vector<std::pair<int, double>> jobs;
  for (int d : separations) {
    for (double t : interaction_times) jobs.emplace_back(d, t);
  }
  std::sort(jobs.begin(), jobs.end());
  jobs.erase(std::unique(jobs.begin(), jobs.end()), jobs.end());
  std::vector<BondPoint> out(jobs.size());

  const double charge = base.nuclei.front().charge;
  auto run_job = [&](std::size_t j) {
    BondPoint& b = out[j];
    b.separation = jobs[j].first;
    b.interaction_time = jobs[j].second;
    try {
      PrepParams q = h2_params(base.symmetry, b.separation, padding);
      q.bohr_radius = base.bohr_radius;
      q.hopping = base.hopping;
      q.regularization = base.regularization;
      q.interaction = base.interaction;
      q.nuclei = {nucleus_at(q.first_site, charge), nucleus_at(q.second_site, charge)};
      q.interaction_time = b.interaction_time;
      q.start_from_ground_state = true;
      q.evolve = base.evolve;
      q.eigen = base.eigen;
      q.verify_step = base.verify_step;
      q.instantaneous_stride = 0;
      const RunResult r = prepare(q);
      const SiteCoord mid{padding + b.separation / 2, padding};
      const auto atom = assemble_h0(SectorBasis::single_particle(q.geometry),
                                    nuclear_field({nucleus_at(mid, charge)}, q.geometry, q.bohr_radius,
                                                  q.hopping, q.regularization),
                                    q.hopping);
      b.atom_energy = ground_state(atom, q.eigen).energy;
      b.final_energy = r.final_energy.total;
      b.exact_energy = r.exact_energy;
      b.binding = b.final_energy - 2.0 * b.atom_energy;
      b.exact_binding = b.exact_energy - 2.0 * b.atom_energy;
      b.final_fidelity = r.final_fidelity;
    } catch (const std::exception& e) {
      b.ok = false;
      b.error = e.what();
      b.final_energy = b.exact_energy = b.binding = b.exact_binding = kNaN;
    }
  };

  const int workers = std::min<int>(threads, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
    return out;
  }
  std::atomic<std::size_t> next{0};
  const int inner = std::max(1, omp_get_max_threads() / workers);
  std::vector<std::jthread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      omp_set_num_threads(inner);
      for (std::size_t j = next++; j < jobs.size(); j = next++) run_job(j);
    });
  }
  pool.clear();
  return out;
}

}  // namespace rdsim
