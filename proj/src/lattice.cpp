#include "rdsim/lattice.hpp"

#include <cmath>
#include <string>

#include "rdsim/errors.hpp"

namespace rdsim {

LatticeGeometry::LatticeGeometry(int lx, int ly) : lx_(lx), ly_(ly) {
  if (lx < 1 || ly < 1) {
    throw DomainError("lattice extents must be >= 1, got " + std::to_string(lx) + "x" +
                      std::to_string(ly));
  }
}

LatticeGeometry LatticeGeometry::from_padding(int padding) {
  if (padding < 0) throw DomainError("padding must be >= 0");
  return LatticeGeometry(2 * padding + 1, 2 * padding + 1);
}

int LatticeGeometry::site_index(SiteCoord c) const {
  if (!contains(c)) {
    throw DomainError("site (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                      ") outside " + std::to_string(lx_) + "x" + std::to_string(ly_) +
                      " lattice");
  }
  return c.x + lx_ * c.y;
}

SiteCoord LatticeGeometry::site_coord(int index) const {
  if (index < 0 || index >= num_sites()) {
    throw DomainError("site index " + std::to_string(index) + " out of range");
  }
  return {index % lx_, index / lx_};
}

std::vector<SiteCoord> LatticeGeometry::neighbors(SiteCoord c) const {
  if (!contains(c)) site_index(c);  // throws
  std::vector<SiteCoord> out;
  out.reserve(4);
  const SiteCoord candidates[4] = {{c.x - 1, c.y}, {c.x + 1, c.y}, {c.x, c.y - 1}, {c.x, c.y + 1}};
  for (const auto& n : candidates) {
    if (contains(n)) out.push_back(n);
  }
  return out;
}

std::vector<std::pair<int, int>> LatticeGeometry::bonds() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(lx_ * (ly_ - 1) + ly_ * (lx_ - 1)));
  for (int y = 0; y < ly_; ++y) {
    for (int x = 0; x < lx_; ++x) {
      const int i = x + lx_ * y;
      if (x + 1 < lx_) out.emplace_back(i, i + 1);
      if (y + 1 < ly_) out.emplace_back(i, i + lx_);
    }
  }
  return out;
}

double euclidean_distance(SiteCoord a, SiteCoord b) noexcept {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

double euclidean_distance(SiteCoord a, Point2 b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace rdsim
