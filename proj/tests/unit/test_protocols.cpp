#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rdsim/errors.hpp"
#include "rdsim/protocols.hpp"

using namespace rdsim;

namespace {

StateVector random_state(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> d;
  StateVector v(static_cast<std::size_t>(n));
  for (auto& z : v) z = {d(rng), d(rng)};
  normalize(v);
  return v;
}

// Quick settings for small lattices.
PrepParams quick(PrepParams p) {
  p.verify_step = false;
  p.instantaneous_stride = 0;
  p.evolve.samples = 20;
  return p;
}

PrepParams small_helium(double t_int = 10.0) {
  auto p = quick(bosonic_helium_params(2));
  p.bohr_radius = 2.0;
  p.interaction.v_int = default_vint(2.0, 6.0);
  p.ramp_time = 60.0;
  p.interaction_time = t_int;
  return p;
}

PrepParams small_h2(Exchange s, int d = 3, int pad = 3) {
  auto p = quick(h2_params(s, d, pad));
  p.ramp_time = 60.0;
  return p;
}

}  // namespace

TEST_CASE("reference parameter sets") {
  const auto he = bosonic_helium_params();
  CHECK(he.geometry.lx() == 21);
  CHECK(he.geometry.ly() == 21);
  CHECK(he.nuclei.size() == 1);
  CHECK(he.nuclei[0].charge == 2.0);
  CHECK(he.nuclei[0].position.x == 10.0);
  CHECK(he.bohr_radius == 4.0);
  CHECK(he.interaction.v_int == doctest::Approx(std::pow(4.0, 4) / 6.0));
  CHECK(he.interaction_time == 20.0);
  CHECK(he.first_site == he.second_site);

  const auto fe = fermionic_helium_params();
  CHECK(fe.symmetry == Exchange::antisymmetric);
  CHECK(fe.ramp_time == 140.0);
  CHECK(fe.interaction_time == 10.0);
  CHECK(fe.second_site.x == 13);
  CHECK(fe.aux_scale.value() == 0.9);
  CHECK(fe.total_time() == doctest::Approx(210.0));

  const auto h2 = h2_params(Exchange::symmetric);
  CHECK(h2.geometry.lx() == 24);
  CHECK(h2.geometry.ly() == 21);
  CHECK(h2.nuclei[0].position.x == 10.0);
  CHECK(h2.nuclei[1].position.x == 13.0);
  CHECK(h2.nuclei[0].position.y == 10.0);
  CHECK(h2.interaction.v_int == doctest::Approx(16.0 / 6.0));
  CHECK(h2.total_time() == 210.0);
  CHECK_THROWS_AS(h2_params(Exchange::symmetric, 0), ValidationError);
}

TEST_CASE("energy components: additivity, expectation and trivial cases") {
  const auto p = small_h2(Exchange::symmetric);
  const auto plan = build_prep_plan(p);
  const auto& parts = plan.final_parts;
  const auto h = parts.total();
  const auto psi = random_state(h.dim(), 3);
  const auto e = measure_energy_components(psi, parts);
  CHECK(e.total == doctest::Approx(e.kinetic + e.potential + e.interaction).epsilon(1e-12));
  CHECK(std::abs(e.total - expectation(h, psi)) <= 1e-10);

  const auto gs = ground_state(h);
  CHECK(measure_energy_components(gs.state, parts).total == doctest::Approx(gs.energy).epsilon(1e-10));

  // Hopping switched off: a localized ket has no kinetic energy.
  const HamiltonianParts frozen{parts.kinetic.scaled(0.0), parts.potential, parts.interaction};
  const auto ket = basis_state(plan.basis, 3, 17);
  const auto ek = measure_energy_components(ket, frozen);
  CHECK(ek.kinetic == 0.0);
  CHECK(measure_energy_components(ket, parts).kinetic == doctest::Approx(0.0));

  CHECK_THROWS_AS(measure_energy_components(StateVector(5), parts), ShapeError);
}

TEST_CASE("plan: stage timing and schedules") {
  auto p = quick(fermionic_helium_params(3));
  const auto plan = build_prep_plan(p);
  CHECK(plan.interaction_start == doctest::Approx(200.0));
  CHECK(plan.t_end == doctest::Approx(210.0));
  const auto& h = plan.hamiltonian;
  // hopping, nucleus, auxiliary well, orbital bias, interaction
  REQUIRE(h.size() == 5);
  auto c0 = h.coefficients(0.0);
  CHECK(c0[0] == 0.0);
  CHECK(c0[2] == 1.0);
  CHECK(c0[4] == 0.0);
  auto c1 = h.coefficients(140.0);
  CHECK(c1[0] == doctest::Approx(1.0));
  CHECK(c1[2] == doctest::Approx(1.0));
  auto c2 = h.coefficients(200.0);
  CHECK(c2[2] == doctest::Approx(0.0));
  CHECK(c2[3] == doctest::Approx(1.0));
  CHECK(c2[4] == doctest::Approx(0.0));
  auto c3 = h.coefficients(210.0);
  CHECK(c3[3] == doctest::Approx(0.0));
  CHECK(c3[4] == doctest::Approx(1.0));
  // Both particles start on their sites.
  CHECK(fidelity(plan.initial, basis_state(plan.basis, plan.basis.geometry().site_index(p.first_site),
                                           plan.basis.geometry().site_index(p.second_site))) ==
        doctest::Approx(1.0));

  p.start_from_ground_state = true;
  const auto direct = build_prep_plan(p);
  CHECK(direct.interaction_start == 0.0);
  CHECK(direct.t_end == doctest::Approx(10.0));
}

TEST_CASE("orbital bias: the x and y axes are mirror images on a square lattice") {
  auto p = quick(fermionic_helium_params(3));
  const auto px = build_prep_plan(p);
  p.bias_axis_x = false;
  const auto py = build_prep_plan(p);
  const auto& g = p.geometry;
  const auto& bx = px.hamiltonian.part(3);
  const auto& by = py.hamiltonian.part(3);
  auto energy = [&](const PrepPlan& plan, const SparseOperator& b, SiteCoord a, SiteCoord c) {
    return expectation(b, basis_state(plan.basis, g.site_index(a), g.site_index(c)));
  };
  double peak = 0.0;
  for (int i = 0; i < g.num_sites(); ++i) {
    const auto a = g.site_coord(i);
    const SiteCoord other{0, 0};
    if (a == other) continue;
    const double ex = energy(px, bx, a, other);
    const double ey = energy(py, by, {a.y, a.x}, {other.y, other.x});
    CHECK(ex == doctest::Approx(ey).epsilon(1e-8));
    peak = std::min(peak, ex);
  }
  // Attractive, and about a hundredth of the nuclear depth.
  CHECK(peak < 0.0);
  const auto& nuc = px.hamiltonian.part(1);
  const auto centre = p.first_site;
  const double depth = energy(px, nuc, centre, {0, 0}) - energy(px, nuc, {0, 1}, {0, 0});
  CHECK(-peak == doctest::Approx(0.01 * -depth).epsilon(0.05));
}

TEST_CASE("prepare: matches dense propagation of the same schedule") {
  auto p = small_h2(Exchange::symmetric, 1, 1);
  p.ramp_time = 20.0;
  p.interaction_time = 5.0;
  const auto plan = build_prep_plan(p);
  REQUIRE(plan.basis.dim() <= 200);
  std::vector<Eigen::MatrixXd> parts;
  for (std::size_t k = 0; k < plan.hamiltonian.size(); ++k) parts.push_back(oracle::dense(plan.hamiltonian.part(k)));
  auto h_at = [&](double t) {
    const auto c = plan.hamiltonian.coefficients(t);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(parts[0].rows(), parts[0].cols());
    for (std::size_t k = 0; k < parts.size(); ++k) h += c[k] * parts[k];
    return h;
  };
  const auto ref = oracle::rk4(h_at, oracle::to_eigen(plan.initial), 0.0, plan.t_end, 20000);

  auto q = p;
  q.evolve.scheme = Propagator::magnus4;
  const auto r = prepare(q);
  const auto got = oracle::to_eigen(r.final_state);
  CHECK(std::norm(ref.dot(got)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.stats.max_norm_drift <= 1e-8);
}

TEST_CASE("prepare: variational bound and error definitions") {
  for (double t_int : {0.5, 10.0}) {
    const auto r = prepare(small_helium(t_int));
    CHECK(r.exact_energy <= r.final_energy.total + 1e-9 * std::abs(r.exact_energy));
    const double err = std::abs(r.final_energy.total - r.exact_energy);
    CHECK(r.relative_error == doctest::Approx(err / std::abs(r.exact_energy + 8.0)));
    CHECK(r.relative_error_absolute == doctest::Approx(err / std::abs(r.exact_energy)));
    CHECK(r.final_fidelity <= 1.0 + 1e-12);
    REQUIRE_FALSE(r.trajectory.empty());
    CHECK(r.trajectory.front().t == 0.0);
    CHECK(r.trajectory.back().t == doctest::Approx(r.t_end));
    CHECK(r.trajectory.back().fidelity_target == doctest::Approx(r.final_fidelity));
    for (const auto& s : r.trajectory) CHECK(std::abs(s.norm - 1.0) <= 1e-8);
  }
}

TEST_CASE("prepare: without interactions a slow ramp reaches the ground state") {
  auto p = small_helium();
  p.interaction.v_int = 0.0;
  p.ramp_time = 200.0;
  const auto r = prepare(p);
  CHECK(r.final_fidelity > 0.999);
  CHECK(r.relative_error < 1e-3);
}

TEST_CASE("prepare: fermionic helium without interactions") {
  auto p = quick(fermionic_helium_params(4));
  p.bohr_radius = 2.0;
  p.interaction.v_int = 0.0;
  const auto r = prepare_fermionic_helium(p);
  MESSAGE("fidelity " << r.final_fidelity << " degeneracy " << r.ground_degeneracy);
  CHECK(r.final_fidelity >= 0.99);
}

TEST_CASE("prepare: longer interaction ramps are never worse") {
  double previous = -1.0;
  for (double t_int : {10.0, 20.0, 40.0}) {
    auto p = small_helium(t_int);
    p.start_from_ground_state = true;
    const auto r = prepare(p);
    MESSAGE("T_int " << t_int << " fidelity " << r.final_fidelity << " error " << r.relative_error);
    CHECK(r.final_fidelity >= previous - 1e-9);
    previous = r.final_fidelity;
  }
}

TEST_CASE("prepare: step halving check and instantaneous fidelity") {
  auto p = small_helium(5.0);
  p.ramp_time = 20.0;
  p.verify_step = true;
  p.instantaneous_stride = 5;
  const auto r = prepare(p);
  CHECK(r.step_halving_change >= 0.0);
  CHECK(r.step_halving_change < 1e-4);
  int computed = 0;
  for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
    const bool expected = k % 5 == 0;
    CHECK(std::isnan(r.trajectory[k].fidelity_instantaneous) != expected);
    if (expected) {
      ++computed;
      CHECK(r.trajectory[k].fidelity_instantaneous <= 1.0 + 1e-12);
    }
  }
  CHECK(computed >= 4);
  // At the end the instantaneous and target ground states coincide.
  if ((r.trajectory.size() - 1) % 5 == 0) {
    CHECK(r.trajectory.back().fidelity_instantaneous == doctest::Approx(r.final_fidelity).epsilon(1e-6));
  }
}

TEST_CASE("H2: statistics decide how much the interaction matters") {
  auto shift = [](Exchange s) {
    auto on = small_h2(s);
    on.start_from_ground_state = true;
    on.interaction_time = 20.0;
    auto off = on;
    off.interaction.v_int = 0.0;
    const auto a = prepare_h2(on, s), b = prepare_h2(off, s);
    return std::pair{a.final_energy.total - b.final_energy.total, std::abs(b.final_energy.total)};
  };
  const auto [triplet, e_t] = shift(Exchange::antisymmetric);
  const auto [singlet, e_s] = shift(Exchange::symmetric);
  MESSAGE("singlet shift " << singlet << " triplet shift " << triplet);
  CHECK(std::abs(triplet) < 0.01 * e_t);
  CHECK(std::abs(singlet) >= 5.0 * std::abs(triplet));
}

TEST_CASE("reverse preparation") {
  SUBCASE("zero-time schedules return the initial configuration") {
    auto p = small_helium();
    p.ramp_time = 0.0;
    p.interaction_time = 0.0;
    const auto r = prepare(p);
    CHECK(r.t_end == 0.0);
    CHECK(reverse_prep_return_probability(r, p) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("an adiabatic path run backwards from the exact ground state") {
    auto p = small_helium(60.0);
    p.ramp_time = 200.0;
    auto r = prepare(p);
    const auto plan = build_prep_plan(p);
    r.final_state = ground_state(plan.final_parts.total()).state;
    const double back = reverse_prep_return_probability(r, p);
    MESSAGE("return " << back << " forward fidelity " << r.final_fidelity);
    CHECK(back == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("a diabatic run reversed matches dense propagation") {
    // Undoing the ramps in reverse order is not the inverse evolution, so
    // away from the adiabatic limit the return probability is not tied to
    // the forward fidelity; only the dense cross-check is exact.
    auto p = small_h2(Exchange::symmetric, 1, 1);
    p.ramp_time = 20.0;
    p.interaction_time = 0.1;
    const auto r = prepare(p);
    const double back = reverse_prep_return_probability(r, p);
    const auto plan = build_prep_plan(p);
    REQUIRE(plan.basis.dim() <= 200);
    const auto rev = plan.hamiltonian.reversed(0.0, plan.t_end);
    std::vector<Eigen::MatrixXd> parts;
    for (std::size_t k = 0; k < rev.size(); ++k) parts.push_back(oracle::dense(rev.part(k)));
    auto h_at = [&](double t) {
      const auto c = rev.coefficients(t);
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(parts[0].rows(), parts[0].cols());
      for (std::size_t k = 0; k < parts.size(); ++k) h += c[k] * parts[k];
      return h;
    };
    const auto fwd = oracle::rk4(
        [&](double t) {
          const auto c = plan.hamiltonian.coefficients(t);
          Eigen::MatrixXd h = Eigen::MatrixXd::Zero(parts[0].rows(), parts[0].cols());
          for (std::size_t k = 0; k < parts.size(); ++k) h += c[k] * oracle::dense(plan.hamiltonian.part(k));
          return h;
        },
        oracle::to_eigen(plan.initial), 0.0, plan.t_end, 8000);
    const auto ret = oracle::rk4(h_at, fwd, 0.0, plan.t_end, 8000);
    const double expected = std::norm(oracle::to_eigen(plan.initial).dot(ret));
    MESSAGE("diabatic: return " << back << " fidelity^2 " << r.final_fidelity * r.final_fidelity);
    CHECK(back == doctest::Approx(expected).epsilon(1e-5));
  }
  SUBCASE("shape mismatch") {
    auto p = small_helium();
    auto r = prepare(p);
    r.final_state.resize(3);
    CHECK_THROWS_AS(reverse_prep_return_probability(r, p), ShapeError);
  }
}

TEST_CASE("bond scan") {
  auto base = small_h2(Exchange::symmetric);
  base.verify_step = false;
  const auto serial = bond_scan(base, {3, 1, 0}, {5.0}, 1, 3);
  REQUIRE(serial.size() == 3);
  CHECK(serial[0].separation == 0);
  CHECK_FALSE(serial[0].ok);
  CHECK_FALSE(serial[0].error.empty());
  CHECK(std::isnan(serial[0].binding));
  for (std::size_t k = 1; k < serial.size(); ++k) {
    const auto& b = serial[k];
    CHECK(b.ok);
    CHECK(b.binding == doctest::Approx(b.final_energy - 2.0 * b.atom_energy));
    CHECK(b.exact_binding <= b.binding + 1e-9);
    CHECK(b.atom_energy < -4.0);
  }
  CHECK(serial[1].separation == 1);
  const auto parallel = bond_scan(base, {3, 1, 0}, {5.0}, 2, 3);
  REQUIRE(parallel.size() == 3);
  for (std::size_t k = 1; k < 3; ++k) {
    CHECK(parallel[k].final_energy == doctest::Approx(serial[k].final_energy).epsilon(1e-10));
  }
  CHECK_THROWS_AS(bond_scan(base, {1}, {5.0}, 0, 3), ValidationError);
}

TEST_CASE("validation") {
  auto bad = [](auto mutate) {
    auto p = small_helium();
    mutate(p);
    CHECK_THROWS_AS(prepare(p), ValidationError);
  };
  bad([](auto& p) { p.nuclei.clear(); });
  bad([](auto& p) { p.bohr_radius = 0.0; });
  bad([](auto& p) { p.ramp_time = -1.0; });
  bad([](auto& p) { p.symmetry = Exchange::distinguishable; });
  bad([](auto& p) { p.first_site = {9, 0}; });
  bad([](auto& p) { p.nuclei[0].position = {-1.0, 0.0}; });
  bad([](auto& p) { p.interaction.alpha = 1.0; });
  bad([](auto& p) { p.aux_scale = -0.5; });
  bad([](auto& p) { p.instantaneous_stride = -1; });
  bad([](auto& p) {
    p.symmetry = Exchange::antisymmetric;
    p.second_site = p.first_site;
  });
  CHECK_THROWS_AS(prepare_bosonic_helium(quick(fermionic_helium_params(2))), ValidationError);
  CHECK_THROWS_AS(prepare_fermionic_helium(small_helium()), ValidationError);
  CHECK_THROWS_AS(prepare_h2(small_helium(), Exchange::symmetric), ValidationError);
}
