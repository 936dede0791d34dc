#pragma once

#include <compare>
#include <utility>
#include <vector>

namespace rdsim {

// Integer lattice position in units of the lattice constant.
struct SiteCoord {
  int x = 0;
  int y = 0;
  auto operator<=>(const SiteCoord&) const = default;
};

// Continuous position, used for nuclei that sit between sites.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
  auto operator<=>(const Point2&) const = default;
};

// Rectangular lx by ly grid with open boundaries and row-major indexing.
class LatticeGeometry {
 public:
  LatticeGeometry(int lx, int ly);

  // Square (2p+1) x (2p+1) lattice around a centred nucleus.
  static LatticeGeometry from_padding(int padding);

  int lx() const noexcept { return lx_; }
  int ly() const noexcept { return ly_; }
  int num_sites() const noexcept { return lx_ * ly_; }

  bool contains(SiteCoord c) const noexcept {
    return c.x >= 0 && c.x < lx_ && c.y >= 0 && c.y < ly_;
  }

  // x + lx*y; throws DomainError outside the lattice.
  int site_index(SiteCoord c) const;
  SiteCoord site_coord(int index) const;

  // 2 to 4 nearest neighbours, no wraparound.
  std::vector<SiteCoord> neighbors(SiteCoord c) const;

  // Each nearest-neighbour bond once, as (lower index, higher index).
  std::vector<std::pair<int, int>> bonds() const;

  // Geometric centre ((lx-1)/2, (ly-1)/2).
  Point2 center() const noexcept {
    return {0.5 * (lx_ - 1), 0.5 * (ly_ - 1)};
  }

  bool operator==(const LatticeGeometry&) const = default;

 private:
  int lx_;
  int ly_;
};

double euclidean_distance(SiteCoord a, SiteCoord b) noexcept;
double euclidean_distance(SiteCoord a, Point2 b) noexcept;

// Convenience overloads taking the free function form used in examples.
inline int site_index(SiteCoord c, const LatticeGeometry& g) { return g.site_index(c); }
inline std::vector<SiteCoord> neighbors(SiteCoord c, const LatticeGeometry& g) {
  return g.neighbors(c);
}

}  // namespace rdsim
