#include "rdsim/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

namespace {

constexpr int kMaxHarmonic = 6;
// Ring amplitudes below this fraction of the largest one do not count when
// looking for radial sign changes.
constexpr double kNodeThreshold = 0.05;

char angular_letter(int m) {
  static constexpr char letters[] = "spdfghi";
  return m >= 0 && m <= kMaxHarmonic ? letters[m] : '?';
}

}  // namespace

OrbitalClass classify_orbital_detail(std::span<const Complex> psi, const LatticeGeometry& g,
                                     Point2 nucleus) {
  const auto n = static_cast<std::size_t>(g.num_sites());
  if (psi.size() != n) throw ShapeError("orbital classification needs a one-particle state");

  // Remove the global phase: rotate the largest component onto the real axis.
  std::size_t arg = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(psi[i]) > std::abs(psi[arg])) arg = i;
  }
  const double peak = std::abs(psi[arg]);
  OrbitalClass result{"other", -1, -1, 0.0};
  if (peak == 0.0) return result;
  const Complex phase = std::conj(psi[arg]) / peak;
  std::vector<double> re(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = (psi[i] * phase).real();
    total += std::norm(psi[i]);
  }

  // Group sites into unit-width rings about the nucleus.
  std::map<int, std::vector<std::size_t>> rings;
  std::vector<double> angle(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = g.site_coord(static_cast<int>(i));
    const double dx = c.x - nucleus.x;
    const double dy = c.y - nucleus.y;
    rings[static_cast<int>(std::lround(std::hypot(dx, dy)))].push_back(i);
    angle[i] = std::atan2(dy, dx);
  }

  // Per ring and harmonic, overlaps with the normalised cos/sin patterns.
  struct RingOverlap {
    double c = 0.0;
    double s = 0.0;
  };
  std::vector<std::vector<RingOverlap>> overlaps(kMaxHarmonic + 1);
  std::vector<double> weight(kMaxHarmonic + 1, 0.0);
  for (int m = 0; m <= kMaxHarmonic; ++m) {
    for (const auto& [radius, sites] : rings) {
      RingOverlap o;
      double nc = 0.0, ns = 0.0;
      for (auto i : sites) {
        const bool at_centre = std::hypot(g.site_coord(static_cast<int>(i)).x - nucleus.x,
                                          g.site_coord(static_cast<int>(i)).y - nucleus.y) < 0.5;
        if (m > 0 && at_centre) continue;
        const double bc = m == 0 ? 1.0 : std::cos(m * angle[i]);
        const double bs = m == 0 ? 0.0 : std::sin(m * angle[i]);
        o.c += re[i] * bc;
        o.s += re[i] * bs;
        nc += bc * bc;
        ns += bs * bs;
      }
      o.c = nc > 1e-12 ? o.c / std::sqrt(nc) : 0.0;
      o.s = ns > 1e-12 ? o.s / std::sqrt(ns) : 0.0;
      overlaps[static_cast<std::size_t>(m)].push_back(o);
      weight[static_cast<std::size_t>(m)] += o.c * o.c + o.s * o.s;
    }
  }
  const auto best = static_cast<int>(std::max_element(weight.begin(), weight.end()) - weight.begin());
  result.angular_weight = weight[static_cast<std::size_t>(best)] / total;
  if (result.angular_weight <= 0.5) return result;

  // Radial profile along the dominant angular direction.
  const auto& ov = overlaps[static_cast<std::size_t>(best)];
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& o : ov) {
    cov(0, 0) += o.c * o.c;
    cov(0, 1) += o.c * o.s;
    cov(1, 1) += o.s * o.s;
  }
  cov(1, 0) = cov(0, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  const Eigen::Vector2d dir = es.eigenvectors().col(1);
  std::vector<double> profile;
  profile.reserve(ov.size());
  double profile_peak = 0.0;
  for (const auto& o : ov) {
    profile.push_back(dir(0) * o.c + dir(1) * o.s);
    profile_peak = std::max(profile_peak, std::abs(profile.back()));
  }
  int nodes = 0;
  int last_sign = 0;
  for (double p : profile) {
    if (std::abs(p) < kNodeThreshold * profile_peak) continue;
    const int sign = p > 0 ? 1 : -1;
    if (last_sign != 0 && sign != last_sign) ++nodes;
    last_sign = sign;
  }
  result.angular_momentum = best;
  result.radial_nodes = nodes;
  result.label = std::to_string(nodes + best + 1) + angular_letter(best);
  return result;
}

std::string classify_orbital(std::span<const Complex> psi, const LatticeGeometry& g, Point2 nucleus) {
  return classify_orbital_detail(psi, g, nucleus).label;
}

}  // namespace rdsim
