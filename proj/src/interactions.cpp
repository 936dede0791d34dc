#include "rdsim/interactions.hpp"

#include <algorithm>
#include <cmath>

#include "rdsim/errors.hpp"

namespace rdsim {

void InteractionSpec::validate() const {
  if (!(v_int >= 0.0) || !std::isfinite(v_int)) throw DomainError("v_int must be finite and >= 0");
  if (!(alpha > 2.0)) throw DomainError("interaction exponent alpha must exceed 2");
  if (!std::isfinite(onsite_factor)) throw DomainError("onsite_factor must be finite");
  if (clamp && !(*clamp >= 0.0)) throw DomainError("interaction clamp must be >= 0");
}

namespace {

double kernel(double r, const InteractionSpec& spec) {
  const double v = r == 0.0 ? spec.onsite_factor * spec.v_int : spec.v_int / std::pow(r, spec.alpha);
  return spec.clamp ? std::min(v, *spec.clamp) : v;
}

}  // namespace

double pair_interaction(SiteCoord a, SiteCoord b, const InteractionSpec& spec) {
  return kernel(euclidean_distance(a, b), spec);
}

double default_vint(double a0, double alpha, double J) {
  if (!(a0 > 0.0)) throw DomainError("Bohr radius must be positive");
  if (!(alpha > 2.0)) throw DomainError("interaction exponent alpha must exceed 2");
  return J * std::pow(a0, alpha - 2.0) / alpha;
}

InteractionTable::InteractionTable(const LatticeGeometry& g, const InteractionSpec& spec)
    : lx_(g.lx()), table_(static_cast<std::size_t>(g.num_sites())) {
  spec.validate();
  for (int dy = 0; dy < g.ly(); ++dy) {
    for (int dx = 0; dx < g.lx(); ++dx) {
      table_[static_cast<std::size_t>(dx + lx_ * dy)] =
          kernel(std::hypot(static_cast<double>(dx), static_cast<double>(dy)), spec);
    }
  }
}

}  // namespace rdsim
