#include "rdsim/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rdsim/errors.hpp"

namespace rdsim {

double eval_nuclear(SiteCoord site, const NucleusSpec& n, double a0, double J, double r_reg) {
  if (!(a0 > 0.0)) throw DomainError("Bohr radius must be positive");
  if (!(r_reg > 0.0)) throw DomainError("regularization length must be positive");
  const double r = std::max(euclidean_distance(site, n.position), r_reg);
  return J * n.charge * n.strength_scale / (a0 * r);
}

double eval_linear_drive(SiteCoord site, const LatticeGeometry& g, double a0) {
  if (!(a0 > 0.0)) throw DomainError("Bohr radius must be positive");
  return (site.x - 0.5 * g.lx()) / a0;
}

std::vector<double> nuclear_field(const std::vector<NucleusSpec>& nuclei,
                                  const LatticeGeometry& g, double a0, double J,
                                  double r_reg) {
  std::vector<double> field(static_cast<std::size_t>(g.num_sites()), 0.0);
  for (const auto& n : nuclei) {
    for (int i = 0; i < g.num_sites(); ++i) {
      field[static_cast<std::size_t>(i)] += eval_nuclear(g.site_coord(i), n, a0, J, r_reg);
    }
  }
  return field;
}

std::vector<double> linear_drive_field(const LatticeGeometry& g, double a0) {
  std::vector<double> field(static_cast<std::size_t>(g.num_sites()));
  for (int i = 0; i < g.num_sites(); ++i) {
    field[static_cast<std::size_t>(i)] = eval_linear_drive(g.site_coord(i), g, a0);
  }
  return field;
}

std::vector<double> orbital_bias_field(std::span<const double> psi, double eps) {
  double peak = 0.0;
  for (double v : psi) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) throw DomainError("orbital bias requires a nonzero orbital");
  std::vector<double> field(psi.size());
  std::transform(psi.begin(), psi.end(), field.begin(),
                 [&](double v) { return eps * std::abs(v) / peak; });
  return field;
}

std::vector<double> assemble_potential(const PotentialSpec& spec, const LatticeGeometry& g,
                                       Spin spin) {
  const auto n = static_cast<std::size_t>(g.num_sites());
  for (const auto& e : spec.extras) {
    if (!std::isfinite(e.amplitude)) throw DomainError("non-finite potential amplitude");
    if (e.kind != ExtraKind::linear_x && e.payload.size() != n) {
      throw ShapeError("per-site payload has " + std::to_string(e.payload.size()) +
                       " entries, lattice has " + std::to_string(n));
    }
  }
  auto field = nuclear_field(spec.nuclei, g, spec.bohr_radius, spec.hopping, spec.regularization);
  for (const auto& e : spec.extras) {
    switch (e.kind) {
      case ExtraKind::linear_x: {
        const auto lin = linear_drive_field(g, spec.bohr_radius);
        for (std::size_t i = 0; i < n; ++i) field[i] += e.amplitude * lin[i];
        break;
      }
      case ExtraKind::orbital_bias: {
        const auto bias = orbital_bias_field(e.payload, e.amplitude);
        for (std::size_t i = 0; i < n; ++i) field[i] += bias[i];
        break;
      }
      case ExtraKind::custom_per_site:
        for (std::size_t i = 0; i < n; ++i) field[i] += e.amplitude * e.payload[i];
        break;
    }
  }
  const double scale = spec.spin_scale[static_cast<std::size_t>(spin)];
  if (scale != 1.0) {
    for (auto& v : field) v *= scale;
  }
  return field;
}

std::vector<double> load_site_field_csv(const std::string& path, const LatticeGeometry& g) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open site field CSV '" + path + "'");
  const auto n = static_cast<std::size_t>(g.num_sites());
  std::vector<double> field(n, 0.0);
  std::vector<bool> seen(n, false);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    long idx = 0;
    double value = 0.0;
    if (!(ss >> idx >> value)) {
      if (rows == 0) continue;  // header
      throw ValidationError("malformed row in '" + path + "': " + line);
    }
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw ShapeError("site index " + std::to_string(idx) + " out of range in '" + path + "'");
    }
    field[static_cast<std::size_t>(idx)] = value;
    seen[static_cast<std::size_t>(idx)] = true;
    ++rows;
  }
  if (rows != n || std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ShapeError("site field CSV '" + path + "' must have exactly " + std::to_string(n) +
                     " distinct rows, found " + std::to_string(rows));
  }
  return field;
}

}  // namespace rdsim
