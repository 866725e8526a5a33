#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dstr/geometry.hpp"

namespace dstr {

// Rigid formation geometry plus the precomputed neighbor relation.
// Neighbors are the UAVs within the closed safety-radius ball; with lattice
// spacing equal to the radius the boundary must be inclusive or grid
// neighbors at exactly one spacing would be dropped.
class Formation {
 public:
  Formation(std::vector<Vec3> positions, double safety_radius)
      : positions_(std::move(positions)), safety_radius_(safety_radius) {
    if (positions_.empty()) throw std::invalid_argument("formation needs at least one UAV");
    if (safety_radius_ <= 0.0) throw std::invalid_argument("safety radius must be > 0");
    build_neighbors();
  }

  std::size_t size() const { return positions_.size(); }
  const Vec3& position(std::size_t i) const { return positions_[i]; }
  const std::vector<Vec3>& positions() const { return positions_; }
  double safety_radius() const { return safety_radius_; }

  const std::vector<int>& neighbors(std::size_t i) const { return neighbors_[i]; }

  bool are_neighbors(std::size_t i, std::size_t j) const {
    if (i == j) return false;
    return distance(positions_[i], positions_[j]) <= safety_radius_;
  }

  double max_diameter() const {
    double best = 0.0;
    for (std::size_t i = 0; i < positions_.size(); ++i)
      for (std::size_t j = i + 1; j < positions_.size(); ++j)
        best = std::max(best, distance(positions_[i], positions_[j]));
    return best;
  }

 private:
  // Uniform grid with cell size = safety radius; each cell only has to be
  // checked against its 3x3x3 neighborhood.
  void build_neighbors() {
    neighbors_.assign(positions_.size(), {});
    const double cell = safety_radius_;
    auto key = [&](const Vec3& p) {
      const long long ix = static_cast<long long>(std::floor(p.x / cell));
      const long long iy = static_cast<long long>(std::floor(p.y / cell));
      const long long iz = static_cast<long long>(std::floor(p.z / cell));
      return std::tuple{ix, iy, iz};
    };
    std::unordered_map<long long, std::vector<int>> buckets;
    auto hash = [](long long ix, long long iy, long long iz) {
      return (ix * 73856093LL) ^ (iy * 19349663LL) ^ (iz * 83492791LL);
    };
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      auto [ix, iy, iz] = key(positions_[i]);
      buckets[hash(ix, iy, iz)].push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      auto [ix, iy, iz] = key(positions_[i]);
      for (long long dx = -1; dx <= 1; ++dx)
        for (long long dy = -1; dy <= 1; ++dy)
          for (long long dz = -1; dz <= 1; ++dz) {
            auto it = buckets.find(hash(ix + dx, iy + dy, iz + dz));
            if (it == buckets.end()) continue;
            for (int j : it->second) {
              if (static_cast<std::size_t>(j) == i) continue;
              if (distance(positions_[i], positions_[j]) <= safety_radius_)
                neighbors_[i].push_back(j);
            }
          }
      std::sort(neighbors_[i].begin(), neighbors_[i].end());
      neighbors_[i].erase(std::unique(neighbors_[i].begin(), neighbors_[i].end()),
                          neighbors_[i].end());
    }
  }

  std::vector<Vec3> positions_;
  double safety_radius_;
  std::vector<std::vector<int>> neighbors_;
};

inline constexpr double kFormationAltitude = 50.0;

// Rectangular formation on a hexagonal (offset-row) lattice with the given
// nearest-neighbor spacing. Interior UAVs have six neighbors when the
// safety radius equals the spacing.
inline Formation gen_hex_grid(std::size_t rows, std::size_t cols, double spacing,
                              double safety_radius) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("hex grid needs rows, cols >= 1");
  if (spacing <= 0.0) throw std::invalid_argument("spacing must be > 0");
  std::vector<Vec3> pts;
  pts.reserve(rows * cols);
  const double row_step = spacing * std::sqrt(3.0) / 2.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      pts.push_back({c * spacing + (r % 2 ? spacing / 2.0 : 0.0), r * row_step,
                     kFormationAltitude});
  return Formation(std::move(pts), safety_radius);
}

inline std::size_t hex_ring_count(std::size_t rings) { return 1 + 3 * rings * (rings + 1); }

// A center UAV surrounded by `rings` concentric hexagonal rings, spacing
// between lattice neighbors as given. Ring k contributes 6k UAVs.
inline Formation gen_hex_rings(std::size_t rings, double spacing, double safety_radius) {
  if (spacing <= 0.0) throw std::invalid_argument("spacing must be > 0");
  std::vector<Vec3> pts;
  pts.reserve(hex_ring_count(rings));
  auto axial = [&](long long q, long long r) {
    return Vec3{spacing * (q + r / 2.0), spacing * std::sqrt(3.0) / 2.0 * r,
                kFormationAltitude};
  };
  pts.push_back(axial(0, 0));
  // Walk each ring from axial (k, -k) taking k steps in each of the six
  // lattice directions.
  constexpr std::pair<int, int> dirs[6] = {{0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}, {1, 0}};
  for (std::size_t k = 1; k <= rings; ++k) {
    long long q = static_cast<long long>(k), r = -static_cast<long long>(k);
    for (const auto& [dq, dr] : dirs)
      for (std::size_t step = 0; step < k; ++step) {
        pts.push_back(axial(q, r));
        q += dq;
        r += dr;
      }
  }
  return Formation(std::move(pts), safety_radius);
}

// Fully-connected formation: all UAVs on a circle well inside one safety
// radius, so the neighbor graph is complete.
inline Formation gen_single_hop(std::size_t count, double safety_radius) {
  if (count < 1) throw std::invalid_argument("single-hop formation needs >= 1 UAV");
  std::vector<Vec3> pts;
  pts.reserve(count);
  if (count == 1) {
    pts.push_back({0.0, 0.0, kFormationAltitude});
  } else {
    const double radius = 0.4 * safety_radius;
    for (std::size_t i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(i) / count;
      pts.push_back({radius * std::cos(a), radius * std::sin(a), kFormationAltitude});
    }
  }
  return Formation(std::move(pts), safety_radius);
}

}  // namespace dstr
