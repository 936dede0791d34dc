#pragma once

#include <optional>
#include <vector>

#include "rdsim/lattice.hpp"

namespace rdsim {

// v_int * |a-b|^-alpha between distinct sites, onsite_factor * v_int on a
// shared site (opposite spins only). `clamp` caps the pair energy, modelling
// the soft-core saturation of dressed interactions.
struct InteractionSpec {
  double v_int = 0.0;
  double alpha = 6.0;
  double onsite_factor = 2.0;
  std::optional<double> clamp;

  void validate() const;
};

double pair_interaction(SiteCoord a, SiteCoord b, const InteractionSpec& spec);

// J * a0^(alpha-2) / alpha.
double default_vint(double a0, double alpha, double J = 1.0);

// Pair energies tabulated by displacement (|dx|, |dy|); O(N) memory for any
// lattice size.
class InteractionTable {
 public:
  InteractionTable(const LatticeGeometry& g, const InteractionSpec& spec);

  double operator()(SiteCoord a, SiteCoord b) const noexcept {
    const int dx = a.x > b.x ? a.x - b.x : b.x - a.x;
    const int dy = a.y > b.y ? a.y - b.y : b.y - a.y;
    return table_[static_cast<std::size_t>(dx + lx_ * dy)];
  }

 private:
  int lx_;
  std::vector<double> table_;
};

}  // namespace rdsim
