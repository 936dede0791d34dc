#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rdsim/basis.hpp"
#include "rdsim/errors.hpp"

using namespace rdsim;

TEST_CASE("sector dimensions") {
  const LatticeGeometry g(21, 21);
  CHECK(build_sector_basis(g, 2, Exchange::symmetric).dim() == 97461);
  CHECK(build_sector_basis(g, 2, Exchange::antisymmetric).dim() == 97020);
  CHECK(build_sector_basis(g, 2, Exchange::distinguishable).dim() == 441 * 441);
  CHECK(build_sector_basis(g, 1).dim() == 441);
  CHECK(build_sector_basis(LatticeGeometry(2, 1), 2, Exchange::antisymmetric).dim() == 1);
  CHECK_THROWS_AS(build_sector_basis(g, 3), UnsupportedError);
}

TEST_CASE("index maps round trip") {
  const LatticeGeometry g(24, 21);  // 504 sites, symmetric dim 127260
  for (auto sym : {Exchange::symmetric, Exchange::antisymmetric, Exchange::distinguishable}) {
    const auto b = SectorBasis::two_particle(g, sym);
    for (int k = 0; k < b.dim(); ++k) {
      const auto [i, j] = b.sites(k);
      REQUIRE(b.index_of(i, j) == k);
    }
  }
  const auto one = SectorBasis::single_particle(g);
  for (int k = 0; k < one.dim(); ++k) CHECK(one.index_of(one.sites(k).first) == k);
}

TEST_CASE("lexicographic ordering") {
  const auto b = SectorBasis::two_particle(LatticeGeometry(3, 1), Exchange::symmetric);
  const std::pair<int, int> expected[] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  for (int k = 0; k < 6; ++k) CHECK(b.sites(k) == expected[k]);
}

TEST_CASE("pair amplitudes carry exchange symmetry") {
  const LatticeGeometry g(3, 2);
  const auto sym = SectorBasis::two_particle(g, Exchange::symmetric);
  const auto anti = SectorBasis::two_particle(g, Exchange::antisymmetric);

  const auto s00 = basis_state(sym, 0, 0);
  CHECK(pair_amplitude(sym, s00, 0, 0) == Complex(1.0));

  std::mt19937 rng(3);
  std::normal_distribution<double> d;
  StateVector ps(static_cast<std::size_t>(sym.dim())), pa(static_cast<std::size_t>(anti.dim()));
  for (auto& z : ps) z = {d(rng), d(rng)};
  for (auto& z : pa) z = {d(rng), d(rng)};
  normalize(ps);
  normalize(pa);
  double total_s = 0.0, total_a = 0.0;
  for (int i = 0; i < g.num_sites(); ++i) {
    CHECK(pair_amplitude(anti, pa, i, i) == Complex(0.0));
    for (int j = 0; j < g.num_sites(); ++j) {
      CHECK(pair_amplitude(sym, ps, i, j) == pair_amplitude(sym, ps, j, i));
      CHECK(pair_amplitude(anti, pa, i, j) == -pair_amplitude(anti, pa, j, i));
      if (i <= j) total_s += std::norm(pair_amplitude(sym, ps, i, j));
      if (i < j) total_a += std::norm(pair_amplitude(anti, pa, i, j));
    }
  }
  CHECK(total_s == doctest::Approx(1.0));
  CHECK(total_a == doctest::Approx(1.0));
}

TEST_CASE("embedding is an isometry with the right symmetry") {
  const LatticeGeometry g(3, 3);
  const auto anti = SectorBasis::two_particle(g, Exchange::antisymmetric);
  const auto psi = basis_state(anti, 1, 5);
  const auto full = embed_distinguishable(anti, psi);
  CHECK(norm(full) == doctest::Approx(1.0));
  CHECK(full[1 * 9 + 5] == -full[5 * 9 + 1]);

  const auto sym = SectorBasis::two_particle(g, Exchange::symmetric);
  const auto rho = site_density(sym, basis_state(sym, 4, 4));
  CHECK(rho[4] == 2.0);
  CHECK_THROWS_AS(basis_state(anti, 2, 2), DomainError);
}
