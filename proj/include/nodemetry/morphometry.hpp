#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nodemetry/connected_components.hpp"
#include "nodemetry/volume.hpp"

namespace nodemetry {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;

struct NodeMeasurement {
  std::int64_t component_index = 0;
  std::int64_t voxel_count = 0;
  double volume_mm3 = 0.0;
  double sad_mm = 0.0;
  std::int64_t sad_slice_index = 0;
  double long_axis_mm = 0.0;
};

/// Pixel (i, j) on one axial slice.
using Pixel = std::array<std::int64_t, 2>;

/// Corners of each pixel's footprint (center +- half spacing), in mm.
std::vector<Point2<double>> slice_footprint(std::span<const Pixel> pixels,
                                            const Eigen::Vector2d& spacing);

namespace detail {

template <typename Scalar>
Scalar cross(const Point2<Scalar>& o, const Point2<Scalar>& a, const Point2<Scalar>& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace detail

/// Counter-clockwise hull (monotone chain), collinear points dropped.
/// All-collinear input yields the two extremes, one point yields itself.
template <typename Scalar>
std::vector<Point2<Scalar>> convex_hull(std::span<const Point2<Scalar>> points) {
  if (points.empty()) throw EmptyInputError("convex hull of an empty point set");
  std::vector<Point2<Scalar>> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() < 3) return sorted;

  std::vector<Point2<Scalar>> hull(2 * sorted.size());
  std::size_t k = 0;
  for (const auto& p : sorted) {
    while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p) <= Scalar(0)) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = sorted.rbegin() + 1; it != sorted.rend(); ++it) {
    while (k >= lower && detail::cross(hull[k - 2], hull[k - 1], *it) <= Scalar(0)) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

/// Minimum caliper width of a convex polygon (rotating calipers).
/// A point or a segment has width 0.
double min_width(std::span<const Point2<double>> hull);

/// Maximum caliper distance (polygon diameter).
double max_diameter(std::span<const Point2<double>> hull);

/// Short-axis diameter of one connected node: max over axial slices of the
/// slice's minimum width. A slice's footprint is the hull of its pixel
/// centres dilated by a disk of diameter min(spacing x, spacing y), so a
/// single pixel measures that diameter. `voxels` are linear indices into
/// `grid`, which must be axial-last.
NodeMeasurement measure_node(std::span<const std::int64_t> voxels, const Grid& grid,
                             std::int64_t component_index = 0);

/// measure_node for every component of `set`, in component order.
std::vector<NodeMeasurement> measure_components(const ComponentSet& set);

}  // namespace nodemetry
