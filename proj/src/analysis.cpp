#include "crowdsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace crowdsim {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  std::size_t size_of_root(std::size_t root) const { return size_[root]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

double distance(Vec2 a, Vec2 b, std::optional<double> period) {
  Vec2 d = b - a;
  if (period) d.x -= *period * std::round(d.x / *period);
  return norm(d);
}

}  // namespace

std::vector<std::size_t> detect_clusters(const std::vector<Vec2>& points, double link_distance,
                                         std::optional<double> periodic_length) {
  DisjointSets sets(points.size());
  for (std::size_t a = 0; a < points.size(); ++a) {
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      if (distance(points[a], points[b], periodic_length) <= link_distance) sets.unite(a, b);
    }
  }
  std::vector<std::size_t> sizes;
  for (std::size_t a = 0; a < points.size(); ++a) {
    if (sets.find(a) == a) sizes.push_back(sets.size_of_root(a));
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

LaneReport detect_lanes(const Frame& frame, const LaneOptions& options) {
  LaneReport report;
  struct Band {
    double lo, hi;
  };
  std::vector<Band> bands;
  for (std::size_t i = 0; i < 2; ++i) {
    std::vector<Vec2> sorted = frame[i];
    std::stable_sort(sorted.begin(), sorted.end(), [](Vec2 a, Vec2 b) { return a.y < b.y; });
    std::size_t start = 0;
    for (std::size_t k = 1; k <= sorted.size(); ++k) {
      if (k < sorted.size() && sorted[k].y - sorted[k - 1].y <= options.gap_threshold) continue;
      if (k == start) continue;
      const std::vector<Vec2> members(sorted.begin() + static_cast<long>(start), sorted.begin() + static_cast<long>(k));
      Lane lane;
      lane.occupancy = members.size();
      lane.y_min = members.front().y;
      lane.y_max = members.back().y;
      double sum = 0.0;
      for (const auto& p : members) sum += p.y;
      lane.center = sum / static_cast<double>(members.size());
      lane.cluster_sizes = detect_clusters(members, options.link_distance, options.periodic_length);
      report.cluster_count += lane.cluster_sizes.size();
      report.lanes[i].push_back(std::move(lane));
      bands.push_back({members.front().y, members.back().y});
      start = k;
    }
  }
  std::sort(bands.begin(), bands.end(), [](const Band& a, const Band& b) { return a.lo < b.lo; });
  double reach = -std::numeric_limits<double>::infinity();
  for (const auto& b : bands) {
    if (b.lo > reach) ++report.total_lanes;
    reach = std::max(reach, b.hi);
  }
  return report;
}

std::size_t count_close_opposite_pairs(const Frame& frame, double radius, std::optional<double> periodic_length) {
  std::size_t count = 0;
  for (const auto& a : frame[0]) {
    for (const auto& b : frame[1]) {
      if (distance(a, b, periodic_length) < radius) ++count;
    }
  }
  return count;
}

}  // namespace crowdsim
