#pragma once

// Test-only helpers and brute-force oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nodemetry/volume.hpp"

namespace nodemetry::testing {

inline MaskVolume random_mask(const Index3& dims, double density, std::mt19937_64& rng) {
  MaskVolume mask(Grid::from_spacing(dims, Eigen::Vector3d::Ones()));
  std::bernoulli_distribution on(density);
  for (auto& v : mask.data()) v = on(rng) ? 1 : 0;
  return mask;
}

/// Breadth-first flood fill; returns the partition as a set of voxel sets.
inline std::set<std::vector<std::int64_t>> flood_fill_partition(const MaskVolume& mask, int connectivity) {
  const Grid& g = mask.grid();
  std::vector<Index3> moves;
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int nonzero = (di != 0) + (dj != 0) + (dk != 0);
        if (nonzero == 0) continue;
        if (connectivity == 6 && nonzero > 1) continue;
        if (connectivity == 18 && nonzero > 2) continue;
        moves.push_back({di, dj, dk});
      }
    }
  }
  std::vector<bool> seen(static_cast<std::size_t>(g.voxel_count()), false);
  std::set<std::vector<std::int64_t>> parts;
  for (std::int64_t start = 0; start < g.voxel_count(); ++start) {
    if (mask[start] == 0 || seen[static_cast<std::size_t>(start)]) continue;
    std::vector<std::int64_t> part;
    std::deque<std::int64_t> queue{start};
    seen[static_cast<std::size_t>(start)] = true;
    while (!queue.empty()) {
      const std::int64_t v = queue.front();
      queue.pop_front();
      part.push_back(v);
      const Index3 idx = g.unravel(v);
      for (const auto& m : moves) {
        const Index3 nb{idx[0] + m[0], idx[1] + m[1], idx[2] + m[2]};
        if (!g.contains(nb)) continue;
        const std::int64_t n = g.linear_index(nb[0], nb[1], nb[2]);
        if (mask[n] == 0 || seen[static_cast<std::size_t>(n)]) continue;
        seen[static_cast<std::size_t>(n)] = true;
        queue.push_back(n);
      }
    }
    std::sort(part.begin(), part.end());
    parts.insert(std::move(part));
  }
  return parts;
}

/// Width of a point set by sweeping projection directions over [0, pi).
inline double sweep_width(const std::vector<Eigen::Vector2d>& points, int steps = 200000) {
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < steps; ++s) {
    const double t = std::numbers::pi * double(s) / double(steps);
    const Eigen::Vector2d dir(std::cos(t), std::sin(t));
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& p : points) {
      const double x = p.dot(dir);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    best = std::min(best, hi - lo);
  }
  return best;
}

/// Hull vertices by the all-pairs half-plane test: (p, q) is a hull edge
/// when every other point lies strictly left of it or on the segment.
inline std::set<std::pair<double, double>> brute_force_hull(const std::vector<Eigen::Vector2d>& pts) {
  std::set<std::pair<double, double>> vertices;
  const std::size_t n = pts.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b || pts[a] == pts[b]) continue;
      bool edge = true;
      for (std::size_t c = 0; c < n && edge; ++c) {
        const Eigen::Vector2d ab = pts[b] - pts[a], ac = pts[c] - pts[a];
        const double cross = ab.x() * ac.y() - ab.y() * ac.x();
        if (cross < 0) edge = false;
        if (cross == 0) {
          const double t = ab.dot(ac) / ab.squaredNorm();
          if (t < 0 || t > 1) edge = false;
        }
      }
      if (edge) {
        vertices.insert({pts[a].x(), pts[a].y()});
        vertices.insert({pts[b].x(), pts[b].y()});
      }
    }
  }
  return vertices;
}

/// Naive per-voxel composite loss: mean over classes of BCE + 1 - soft dice.
template <typename GetProb>
double naive_composite_loss(std::int64_t voxels, int classes, GetProb prob, const std::vector<int>& labels) {
  double total = 0.0;
  for (int c = 0; c < classes; ++c) {
    double inter = 0, sum_p = 0, sum_g = 0, bce = 0;
    for (std::int64_t v = 0; v < voxels; ++v) {
      const double p = prob(v, c);
      const double g = labels[static_cast<std::size_t>(v)] == c ? 1.0 : 0.0;
      inter += p * g;
      sum_p += p;
      sum_g += g;
      const double pc = std::min(std::max(p, 1e-7), 1.0 - 1e-7);
      bce += -(g * std::log(pc) + (1.0 - g) * std::log(1.0 - pc));
    }
    const double soft = (2.0 * inter + 1e-5) / (sum_p + sum_g + 1e-5);
    total += bce / double(voxels) + (1.0 - soft);
  }
  return total / classes;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("nodemetry-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace nodemetry::testing
