#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "rdsim/lattice.hpp"

namespace rdsim {

inline constexpr double kDefaultRegularization = 0.5;

// Attractive Coulomb-like well J*Z*scale/(a0*r) centred at `position`.
struct NucleusSpec {
  Point2 position;
  double charge = 1.0;
  double strength_scale = 1.0;
};

enum class ExtraKind { linear_x, orbital_bias, custom_per_site };

// Additional background term. For orbital_bias the payload holds orbital
// amplitudes and `amplitude` is the peak of the resulting field; for
// custom_per_site the payload is the field itself, scaled by `amplitude`.
struct ExtraTerm {
  ExtraKind kind = ExtraKind::custom_per_site;
  double amplitude = 0.0;
  std::vector<double> payload;
};

enum class Spin { up = 0, down = 1 };

// Composable V_pot(site, spin). Positive values are attractive: the field
// enters the Hamiltonian with a minus sign.
struct PotentialSpec {
  std::vector<NucleusSpec> nuclei;
  double bohr_radius = 1.0;
  double hopping = 1.0;
  double regularization = kDefaultRegularization;
  std::vector<ExtraTerm> extras;
  std::array<double, 2> spin_scale{1.0, 1.0};

  bool spin_independent() const noexcept { return spin_scale[0] == spin_scale[1]; }
};

// J*Z*scale/(a0*max(r, r_reg)).
double eval_nuclear(SiteCoord site, const NucleusSpec& n, double a0, double J,
                    double r_reg = kDefaultRegularization);

// Static profile of the linear drive, (x - lx/2)/a0.
double eval_linear_drive(SiteCoord site, const LatticeGeometry& g, double a0);

std::vector<double> nuclear_field(const std::vector<NucleusSpec>& nuclei,
                                  const LatticeGeometry& g, double a0, double J,
                                  double r_reg = kDefaultRegularization);
std::vector<double> linear_drive_field(const LatticeGeometry& g, double a0);

// eps*|psi(i)|/max|psi|; throws DomainError for an all-zero orbital.
std::vector<double> orbital_bias_field(std::span<const double> psi, double eps);

std::vector<double> assemble_potential(const PotentialSpec& spec, const LatticeGeometry& g,
                                       Spin spin = Spin::up);

// Reads "index,value" rows (optional header line) into a length-N field.
std::vector<double> load_site_field_csv(const std::string& path, const LatticeGeometry& g);

}  // namespace rdsim
