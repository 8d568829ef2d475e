#pragma once

#include <cstddef>
#include <iosfwd>
#include <variant>
#include <vector>

#include "crowdsim/vec2.hpp"

namespace crowdsim {

/// Axis-aligned rectangle [x0,x1]x[y0,y1].
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  double area() const { return (x1 - x0) * (y1 - y0); }
};

struct Disc {
  Vec2 center;
  double radius = 0.0;
};

/// Solid region excluded from the walkable space. Interiors are open sets, so
/// obstacle boundaries belong to the walkable closure.
using Obstacle = std::variant<Rect, Disc>;

bool strictly_inside(const Obstacle& obstacle, Vec2 p);

enum class BoundaryX { periodic, open };

/// Corridor [0,L]x[0,d] with reflecting walls at y=0 and y=d.
struct Domain {
  double length = 20.0;
  double width = 4.0;
  std::vector<Obstacle> obstacles;
  BoundaryX boundary_x = BoundaryX::periodic;

  bool contains(Vec2 p) const {
    return p.x >= 0.0 && p.x <= length && p.y >= 0.0 && p.y <= width;
  }
  /// True when p lies in the closure of the walkable region.
  bool walkable(Vec2 p) const;

  /// Shortest displacement from a to b, using the minimum image in x when periodic.
  Vec2 displacement(Vec2 a, Vec2 b) const;

  /// Throws ValidationError when dimensions are non-positive or an obstacle leaves the box.
  void validate() const;
};

/// Cell-averaged porosity on a uniform square grid; cell (i,j) covers
/// [i h,(i+1) h) x [j h,(j+1) h), linear index j*nx + i.
class PorosityGrid {
 public:
  PorosityGrid(std::size_t nx, std::size_t ny, double h, std::vector<double> phi);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t cell_count() const { return phi_.size(); }
  double h() const { return h_; }
  double cell_area() const { return h_ * h_; }
  double length() const { return h_ * static_cast<double>(nx_); }
  double width() const { return h_ * static_cast<double>(ny_); }

  std::size_t index(std::size_t i, std::size_t j) const { return j * nx_ + i; }
  double phi(std::size_t i, std::size_t j) const { return phi_[index(i, j)]; }
  double phi(std::size_t cell) const { return phi_[cell]; }
  const std::vector<double>& values() const { return phi_; }
  Vec2 center(std::size_t cell) const;

  /// Porosity measure of a set of cells: sum of phi h^2.
  double pore_volume(const std::vector<std::size_t>& cells) const;

  void write_csv(std::ostream& out) const;

 private:
  std::size_t nx_;
  std::size_t ny_;
  double h_;
  std::vector<double> phi_;
};

/// Samples samples_per_cell^2 regular sub-cell points per cell to estimate the
/// walkable fraction. Fully solid cells give exactly 0 and obstacle-free cells
/// exactly 1. Rejects non-square cells and a disconnected walkable region.
PorosityGrid build_porosity_grid(const Domain& domain, std::size_t nx, std::size_t ny,
                                 std::size_t samples_per_cell = 16);

/// Cell lookup of phi. Points on a shared edge resolve to the larger-index cell.
double porosity_at(const PorosityGrid& grid, Vec2 x);

/// Cell containing x under the same tie-break as porosity_at.
std::size_t cell_of(const PorosityGrid& grid, Vec2 x);

struct Clearance {
  double distance = 0.0;
  Vec2 inward_normal;
};

/// Distance to the nearest of {y=0 wall, y=d wall, obstacle boundaries} and the
/// unit normal pointing back into the walkable region. Ties go to y=0, then
/// y=d, then obstacles in list order.
Clearance wall_clearance(const Domain& domain, Vec2 x);

}  // namespace crowdsim
