#include "crowdsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "crowdsim/errors.hpp"

namespace crowdsim {

namespace {

struct ObstacleInside {
  Vec2 p;
  bool operator()(const Rect& r) const {
    return p.x > r.x0 && p.x < r.x1 && p.y > r.y0 && p.y < r.y1;
  }
  bool operator()(const Disc& d) const { return norm(p - d.center) < d.radius; }
};

// Cell box fully covered by a single obstacle (closed containment).
bool covers_box(const Obstacle& obstacle, const Rect& box) {
  if (const auto* r = std::get_if<Rect>(&obstacle)) {
    return box.x0 >= r->x0 && box.x1 <= r->x1 && box.y0 >= r->y0 && box.y1 <= r->y1;
  }
  const auto& d = std::get<Disc>(obstacle);
  const Vec2 corners[] = {{box.x0, box.y0}, {box.x1, box.y0}, {box.x0, box.y1}, {box.x1, box.y1}};
  return std::all_of(std::begin(corners), std::end(corners),
                     [&](Vec2 c) { return norm(c - d.center) <= d.radius; });
}

// Obstacle interior meets the open cell box.
bool meets_box(const Obstacle& obstacle, const Rect& box) {
  if (const auto* r = std::get_if<Rect>(&obstacle)) {
    return r->x0 < box.x1 && r->x1 > box.x0 && r->y0 < box.y1 && r->y1 > box.y0;
  }
  const auto& d = std::get<Disc>(obstacle);
  const Vec2 nearest{std::clamp(d.center.x, box.x0, box.x1), std::clamp(d.center.y, box.y0, box.y1)};
  return norm(nearest - d.center) < d.radius;
}

struct Feature {
  double distance;
  Vec2 normal;
};

Feature clearance_to(const Rect& r, Vec2 p) {
  const Vec2 nearest{std::clamp(p.x, r.x0, r.x1), std::clamp(p.y, r.y0, r.y1)};
  const Vec2 off = p - nearest;
  const double dist = norm(off);
  if (dist > 0.0) return {dist, (1.0 / dist) * off};
  // On the boundary or inside: leave through the closest face.
  const double faces[] = {p.x - r.x0, r.x1 - p.x, p.y - r.y0, r.y1 - p.y};
  const Vec2 normals[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  const auto k = static_cast<std::size_t>(std::min_element(std::begin(faces), std::end(faces)) -
                                          std::begin(faces));
  return {0.0, normals[k]};
}

Feature clearance_to(const Disc& d, Vec2 p) {
  const Vec2 off = p - d.center;
  const double r = norm(off);
  if (r == 0.0) return {0.0, {0.0, 1.0}};
  return {std::max(0.0, r - d.radius), (1.0 / r) * off};
}

}  // namespace

bool strictly_inside(const Obstacle& obstacle, Vec2 p) {
  return std::visit(ObstacleInside{p}, obstacle);
}

bool Domain::walkable(Vec2 p) const {
  if (!contains(p)) return false;
  return std::none_of(obstacles.begin(), obstacles.end(),
                      [&](const Obstacle& o) { return strictly_inside(o, p); });
}

Vec2 Domain::displacement(Vec2 a, Vec2 b) const {
  Vec2 d = b - a;
  if (boundary_x == BoundaryX::periodic) d.x -= length * std::round(d.x / length);
  return d;
}

void Domain::validate() const {
  std::vector<std::string> problems;
  if (!(length > 0.0)) problems.push_back(fmt::format("domain: length must be > 0 (got {})", length));
  if (!(width > 0.0)) problems.push_back(fmt::format("domain: width must be > 0 (got {})", width));
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    bool ok = true;
    if (const auto* r = std::get_if<Rect>(&obstacles[k])) {
      ok = r->x0 < r->x1 && r->y0 < r->y1 && r->x0 >= 0.0 && r->y0 >= 0.0 && r->x1 <= length &&
           r->y1 <= width;
    } else {
      const auto& d = std::get<Disc>(obstacles[k]);
      ok = d.radius > 0.0 && d.center.x - d.radius >= 0.0 && d.center.x + d.radius <= length &&
           d.center.y - d.radius >= 0.0 && d.center.y + d.radius <= width;
    }
    if (!ok) problems.push_back(fmt::format("domain: obstacle {} is degenerate or leaves [0,L]x[0,d]", k));
  }
  if (!problems.empty()) throw ValidationError(std::move(problems));
}

PorosityGrid::PorosityGrid(std::size_t nx, std::size_t ny, double h, std::vector<double> phi)
    : nx_(nx), ny_(ny), h_(h), phi_(std::move(phi)) {
  if (nx_ == 0 || ny_ == 0 || !(h_ > 0.0) || phi_.size() != nx_ * ny_) {
    throw ValidationError("porosity grid: inconsistent dimensions");
  }
  for (double v : phi_) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("porosity grid: phi outside [0,1]");
  }
}

Vec2 PorosityGrid::center(std::size_t cell) const {
  const auto i = cell % nx_;
  const auto j = cell / nx_;
  return {(static_cast<double>(i) + 0.5) * h_, (static_cast<double>(j) + 0.5) * h_};
}

double PorosityGrid::pore_volume(const std::vector<std::size_t>& cells) const {
  double sum = 0.0;
  for (auto c : cells) sum += phi_.at(c) * cell_area();
  return sum;
}

void PorosityGrid::write_csv(std::ostream& out) const {
  out << "i,j,phi\n";
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) out << fmt::format("{},{},{}\n", i, j, phi(i, j));
  }
}

PorosityGrid build_porosity_grid(const Domain& domain, std::size_t nx, std::size_t ny,
                                 std::size_t samples_per_cell) {
  domain.validate();
  if (nx == 0 || ny == 0) throw ValidationError("grid: nx and ny must be >= 1");
  if (samples_per_cell == 0) throw ValidationError("grid: samples_per_cell must be >= 1");
  const double hx = domain.length / static_cast<double>(nx);
  const double hy = domain.width / static_cast<double>(ny);
  if (std::abs(hx - hy) > 1e-12 * std::max(hx, hy)) {
    throw ValidationError(fmt::format("grid: cells must be square (L/nx = {} but d/ny = {})", hx, hy));
  }
  const double h = hx;
  const auto s = samples_per_cell;
  const double inv_s = 1.0 / static_cast<double>(s);

  std::vector<double> phi(nx * ny, 1.0);
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      const Rect box{static_cast<double>(i) * h, static_cast<double>(j) * h,
                     static_cast<double>(i + 1) * h, static_cast<double>(j + 1) * h};
      double& value = phi[j * nx + i];
      if (std::any_of(domain.obstacles.begin(), domain.obstacles.end(),
                      [&](const Obstacle& o) { return covers_box(o, box); })) {
        value = 0.0;
        continue;
      }
      std::vector<const Obstacle*> touching;
      for (const auto& o : domain.obstacles) {
        if (meets_box(o, box)) touching.push_back(&o);
      }
      if (touching.empty()) continue;
      std::size_t open = 0;
      for (std::size_t b = 0; b < s; ++b) {
        for (std::size_t a = 0; a < s; ++a) {
          const Vec2 p{box.x0 + (static_cast<double>(a) + 0.5) * inv_s * h,
                       box.y0 + (static_cast<double>(b) + 0.5) * inv_s * h};
          if (std::none_of(touching.begin(), touching.end(),
                           [&](const Obstacle* o) { return strictly_inside(*o, p); })) {
            ++open;
          }
        }
      }
      value = static_cast<double>(open) / static_cast<double>(s * s);
    }
  }

  // 4-neighbour flood fill over cells with phi > 0.
  std::vector<char> seen(phi.size(), 0);
  std::size_t open_cells = 0;
  std::size_t start = phi.size();
  for (std::size_t c = 0; c < phi.size(); ++c) {
    if (phi[c] > 0.0) {
      ++open_cells;
      if (start == phi.size()) start = c;
    }
  }
  if (open_cells == 0) throw ValidationError("domain: walkable region is empty");
  const bool periodic = domain.boundary_x == BoundaryX::periodic;
  std::deque<std::size_t> queue{start};
  seen[start] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    const auto c = queue.front();
    queue.pop_front();
    ++reached;
    const auto i = c % nx;
    const auto j = c / nx;
    auto visit = [&](std::size_t n) {
      if (!seen[n] && phi[n] > 0.0) {
        seen[n] = 1;
        queue.push_back(n);
      }
    };
    if (i > 0) visit(c - 1);
    else if (periodic) visit(j * nx + nx - 1);
    if (i + 1 < nx) visit(c + 1);
    else if (periodic) visit(j * nx);
    if (j > 0) visit(c - nx);
    if (j + 1 < ny) visit(c + nx);
  }
  if (reached != open_cells) {
    throw ValidationError(fmt::format("domain: walkable region is not connected ({} of {} open cells reachable)",
                                      reached, open_cells));
  }
  return PorosityGrid(nx, ny, h, std::move(phi));
}

std::size_t cell_of(const PorosityGrid& grid, Vec2 x) {
  if (!(x.x >= 0.0 && x.x <= grid.length() && x.y >= 0.0 && x.y <= grid.width())) {
    throw OutOfDomainError(fmt::format("point ({}, {}) lies outside the domain", x.x, x.y));
  }
  const auto i = std::min(static_cast<std::size_t>(std::floor(x.x / grid.h())), grid.nx() - 1);
  const auto j = std::min(static_cast<std::size_t>(std::floor(x.y / grid.h())), grid.ny() - 1);
  return grid.index(i, j);
}

double porosity_at(const PorosityGrid& grid, Vec2 x) { return grid.phi(cell_of(grid, x)); }

Clearance wall_clearance(const Domain& domain, Vec2 x) {
  Clearance best{x.y, {0.0, 1.0}};
  if (domain.width - x.y < best.distance) best = {domain.width - x.y, {0.0, -1.0}};
  for (const auto& o : domain.obstacles) {
    const Feature f = std::visit([&](const auto& shape) { return clearance_to(shape, x); }, o);
    if (f.distance < best.distance) best = {f.distance, f.normal};
  }
  best.distance = std::max(best.distance, 0.0);
  return best;
}

}  // namespace crowdsim
