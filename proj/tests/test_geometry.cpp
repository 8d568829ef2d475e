#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "crowdsim/errors.hpp"
#include "crowdsim/geometry.hpp"

using namespace crowdsim;

namespace {

Domain corridor() {
  Domain d;
  d.length = 20.0;
  d.width = 4.0;
  return d;
}

// Area of rect ∩ box, computed in closed form.
double overlap_area(const Rect& a, const Rect& b) {
  const double w = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double h = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  return w * h;
}

}  // namespace

TEST(PorosityGrid, ObstacleFreeCorridorIsFullyOpen) {
  const auto grid = build_porosity_grid(corridor(), 40, 8, 4);
  for (double v : grid.values()) EXPECT_EQ(v, 1.0);
}

TEST(PorosityGrid, CellInsideRectangleIsSolid) {
  auto d = corridor();
  d.obstacles.push_back(Rect{8.0, 1.0, 12.0, 3.0});
  const auto grid = build_porosity_grid(d, 80, 16, 16);
  // cell (40, 8) covers [10,10.25] x [2,2.25]
  EXPECT_EQ(grid.phi(40, 8), 0.0);
  EXPECT_EQ(grid.phi(0, 0), 1.0);
}

TEST(PorosityGrid, HalfCoveredCellMatchesAreaOracle) {
  auto d = corridor();
  // Left half of cell (8, 2) on an h = 0.5 grid: cell box [4,4.5] x [1,1.5].
  const Rect obstacle{4.0, 1.0, 4.25, 1.5};
  d.obstacles.push_back(obstacle);
  const auto grid = build_porosity_grid(d, 40, 8, 32);
  const Rect cell{4.0, 1.0, 4.5, 1.5};
  const double expected = 1.0 - overlap_area(obstacle, cell) / (0.5 * 0.5);
  EXPECT_NEAR(grid.phi(8, 2), expected, 1.0 / 32.0);
  EXPECT_NEAR(expected, 0.5, 1e-15);
}

TEST(PorosityGrid, DiscCoverageAgreesWithMonteCarloArea) {
  auto d = corridor();
  const Disc disc{{10.0, 2.0}, 0.8};
  d.obstacles.push_back(disc);
  const auto grid = build_porosity_grid(d, 40, 8, 16);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    const Vec2 lo = grid.center(c) - Vec2{0.25, 0.25};
    int open = 0;
    constexpr int samples = 20000;
    for (int s = 0; s < samples; ++s) {
      const Vec2 p = lo + Vec2{0.5 * u(rng), 0.5 * u(rng)};
      open += norm(p - disc.center) >= disc.radius ? 1 : 0;
    }
    EXPECT_NEAR(grid.phi(c), static_cast<double>(open) / samples, 0.04) << "cell " << c;
  }
}

TEST(PorosityGrid, RejectsNonSquareCells) {
  EXPECT_THROW(build_porosity_grid(corridor(), 80, 10, 4), ValidationError);
}

TEST(PorosityGrid, RejectsDisconnectedPoreSpace) {
  auto d = corridor();
  d.boundary_x = BoundaryX::open;
  d.obstacles.push_back(Rect{9.0, 0.0, 10.0, 4.0});
  EXPECT_THROW(build_porosity_grid(d, 40, 8, 4), ValidationError);
}

TEST(PorosityGrid, PeriodicWrapKeepsSplitCorridorConnected) {
  auto d = corridor();
  d.obstacles.push_back(Rect{9.0, 0.0, 10.0, 4.0});
  EXPECT_NO_THROW(build_porosity_grid(d, 40, 8, 4));
}

TEST(PorosityGrid, RefinementKeepsSolidAndOpenCells) {
  auto d = corridor();
  d.obstacles.push_back(Rect{5.0, 1.0, 7.3, 2.6});
  d.obstacles.push_back(Disc{{14.0, 2.0}, 1.1});
  const auto coarse = build_porosity_grid(d, 40, 8, 8);
  const auto fine = build_porosity_grid(d, 80, 16, 8);
  for (std::size_t j = 0; j < coarse.ny(); ++j) {
    for (std::size_t i = 0; i < coarse.nx(); ++i) {
      const double v = coarse.phi(i, j);
      if (v != 0.0 && v != 1.0) continue;
      for (std::size_t b = 0; b < 2; ++b) {
        for (std::size_t a = 0; a < 2; ++a) EXPECT_EQ(fine.phi(2 * i + a, 2 * j + b), v);
      }
    }
  }
}

TEST(PorosityGrid, MeasureIsAdditiveAndBoundedByArea) {
  auto d = corridor();
  d.obstacles.push_back(Rect{3.0, 0.5, 6.1, 2.2});
  d.obstacles.push_back(Disc{{12.0, 2.5}, 1.2});
  const auto grid = build_porosity_grid(d, 80, 16, 16);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::size_t> ix(0, grid.nx() - 1), iy(0, grid.ny() - 1);
    auto i0 = ix(rng), i1 = ix(rng), j0 = iy(rng), j1 = iy(rng);
    if (i0 > i1) std::swap(i0, i1);
    if (j0 > j1) std::swap(j0, j1);
    std::uniform_int_distribution<std::size_t> split(i0, i1);
    const auto cut = split(rng);
    std::vector<std::size_t> a, b, all;
    for (auto j = j0; j <= j1; ++j) {
      for (auto i = i0; i <= i1; ++i) {
        (i < cut ? a : b).push_back(grid.index(i, j));
        all.push_back(grid.index(i, j));
      }
    }
    EXPECT_NEAR(grid.pore_volume(all), grid.pore_volume(a) + grid.pore_volume(b), 1e-12);
    EXPECT_LE(grid.pore_volume(all), static_cast<double>(all.size()) * grid.cell_area() + 1e-12);
  }
}

TEST(PorosityAt, LookupAndEdgeTieBreak) {
  auto d = corridor();
  d.obstacles.push_back(Rect{10.0, 0.0, 10.5, 2.0});
  const auto grid = build_porosity_grid(d, 40, 8, 4);
  EXPECT_EQ(porosity_at(grid, {1.0, 1.0}), 1.0);
  EXPECT_EQ(porosity_at(grid, {10.25, 0.75}), 0.0);
  // x = 10 is the edge between open cell 19 and solid cell 20.
  EXPECT_EQ(porosity_at(grid, {10.0, 0.75}), 0.0);
  // x = 10.5 is the edge between solid cell 20 and open cell 21.
  EXPECT_EQ(porosity_at(grid, {10.5, 0.75}), 1.0);
  EXPECT_EQ(porosity_at(grid, {20.0, 4.0}), 1.0);
  EXPECT_THROW(porosity_at(grid, {20.01, 1.0}), OutOfDomainError);
  EXPECT_THROW(porosity_at(grid, {1.0, -0.1}), OutOfDomainError);
}

TEST(WallClearance, NearestWallAndTieBreak) {
  const auto d = corridor();
  auto c = wall_clearance(d, {5.0, 1.0});
  EXPECT_DOUBLE_EQ(c.distance, 1.0);
  EXPECT_EQ(c.inward_normal, (Vec2{0.0, 1.0}));
  c = wall_clearance(d, {5.0, 2.0});
  EXPECT_DOUBLE_EQ(c.distance, 2.0);
  EXPECT_EQ(c.inward_normal, (Vec2{0.0, 1.0}));
  c = wall_clearance(d, {5.0, 3.5});
  EXPECT_DOUBLE_EQ(c.distance, 0.5);
  EXPECT_EQ(c.inward_normal, (Vec2{0.0, -1.0}));
  c = wall_clearance(d, {5.0, 0.0});
  EXPECT_EQ(c.distance, 0.0);
}

TEST(WallClearance, DiscObstacleClosedForm) {
  auto d = corridor();
  d.width = 10.0;
  d.obstacles.push_back(Disc{{10.0, 5.0}, 1.0});
  const Vec2 dir = Vec2{3.0, 4.0} * 0.2;  // unit
  const Vec2 x = Vec2{10.0, 5.0} + 1.2 * dir;
  const auto c = wall_clearance(d, x);
  EXPECT_NEAR(c.distance, 0.2, 1e-12);
  EXPECT_NEAR(c.inward_normal.x, dir.x, 1e-12);
  EXPECT_NEAR(c.inward_normal.y, dir.y, 1e-12);
}

TEST(WallClearance, RectangleFaceAndCorner) {
  auto d = corridor();
  d.obstacles.push_back(Rect{8.0, 1.0, 10.0, 3.0});
  auto c = wall_clearance(d, {10.3, 2.0});
  EXPECT_NEAR(c.distance, 0.3, 1e-12);
  EXPECT_EQ(c.inward_normal, (Vec2{1.0, 0.0}));
  c = wall_clearance(d, {10.3, 3.4});
  EXPECT_NEAR(c.distance, 0.5, 1e-12);
  EXPECT_NEAR(c.inward_normal.x, 0.6, 1e-12);
  EXPECT_NEAR(c.inward_normal.y, 0.8, 1e-12);
}

TEST(Domain, ValidationCatchesBadObstacles) {
  auto d = corridor();
  d.obstacles.push_back(Rect{19.0, 1.0, 21.0, 2.0});
  EXPECT_THROW(d.validate(), ValidationError);
  d.obstacles = {Disc{{1.0, 1.0}, 0.0}};
  EXPECT_THROW(d.validate(), ValidationError);
}

TEST(PorosityGrid, CsvExport) {
  const auto grid = build_porosity_grid(corridor(), 5, 1, 1);
  std::ostringstream out;
  grid.write_csv(out);
  EXPECT_EQ(out.str(), "i,j,phi\n0,0,1\n1,0,1\n2,0,1\n3,0,1\n4,0,1\n");
}
