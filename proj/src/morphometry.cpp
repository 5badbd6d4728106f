#include "nodemetry/morphometry.hpp"

#include <cmath>
#include <limits>

namespace nodemetry {

std::vector<Point2<double>> slice_footprint(std::span<const Pixel> pixels,
                                            const Eigen::Vector2d& spacing) {
  if (pixels.empty()) throw EmptyInputError("slice footprint of an empty slice");
  const Eigen::Vector2d half = spacing / 2.0;
  std::vector<Point2<double>> corners;
  corners.reserve(4 * pixels.size());
  for (const auto& [i, j] : pixels) {
    const Eigen::Vector2d center(double(i) * spacing.x(), double(j) * spacing.y());
    corners.emplace_back(center.x() - half.x(), center.y() - half.y());
    corners.emplace_back(center.x() + half.x(), center.y() - half.y());
    corners.emplace_back(center.x() + half.x(), center.y() + half.y());
    corners.emplace_back(center.x() - half.x(), center.y() + half.y());
  }
  return corners;
}

namespace {

double twice_area(const Point2<double>& a, const Point2<double>& b, const Point2<double>& c) {
  return std::abs(detail::cross(a, b, c));
}

// Visits every antipodal (edge, vertex) pair of a CCW convex polygon with
// n >= 3 vertices: fn(edge_start, edge_end, vertex).
template <typename Fn>
void for_each_antipodal(std::span<const Point2<double>> hull, Fn&& fn) {
  const std::size_t n = hull.size();
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i1 = (i + 1) % n;
    while (twice_area(hull[i], hull[i1], hull[(j + 1) % n]) > twice_area(hull[i], hull[i1], hull[j])) {
      fn(i, i1, j);
      j = (j + 1) % n;
    }
    fn(i, i1, j);
  }
}

}  // namespace

double min_width(std::span<const Point2<double>> hull) {
  if (hull.empty()) throw EmptyInputError("width of an empty hull");
  if (hull.size() < 3) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = hull.size();
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t i1 = (i + 1) % n;
    while (twice_area(hull[i], hull[i1], hull[(j + 1) % n]) > twice_area(hull[i], hull[i1], hull[j])) {
      j = (j + 1) % n;
    }
    const double edge = (hull[i1] - hull[i]).norm();
    best = std::min(best, twice_area(hull[i], hull[i1], hull[j]) / edge);
  }
  return best;
}

double max_diameter(std::span<const Point2<double>> hull) {
  if (hull.empty()) throw EmptyInputError("diameter of an empty hull");
  if (hull.size() == 1) return 0.0;
  if (hull.size() == 2) return (hull[1] - hull[0]).norm();
  double best = 0.0;
  for_each_antipodal(hull, [&](std::size_t i, std::size_t i1, std::size_t j) {
    best = std::max({best, (hull[j] - hull[i]).norm(), (hull[j] - hull[i1]).norm()});
  });
  return best;
}

namespace {

struct SliceShape {
  double width = 0.0;
  double diameter = 0.0;
};

// Hull of the row-extreme pixel centres in voxel units, dilated by a disk
// whose diameter is the smaller in-plane spacing. Width and diameter of a
// disk-dilated hull are those of the hull plus the disk diameter.
SliceShape measure_slice(std::span<const std::int64_t> row_min, std::span<const std::int64_t> row_max,
                         std::span<const std::int64_t> rows, const Eigen::Vector2d& spacing) {
  std::vector<Point2<std::int64_t>> centres;
  centres.reserve(2 * rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    centres.emplace_back(row_min[r], rows[r]);
    if (row_max[r] != row_min[r]) centres.emplace_back(row_max[r], rows[r]);
  }
  const auto hull_units = convex_hull<std::int64_t>(centres);
  std::vector<Point2<double>> hull;
  hull.reserve(hull_units.size());
  for (const auto& p : hull_units) {
    hull.emplace_back(double(p.x()) * spacing.x(), double(p.y()) * spacing.y());
  }
  const double disk = spacing.minCoeff();
  return {min_width(hull) + disk, max_diameter(hull) + disk};
}

}  // namespace

NodeMeasurement measure_node(std::span<const std::int64_t> voxels, const Grid& grid,
                             std::int64_t component_index) {
  if (voxels.empty()) throw EmptyInputError("cannot measure an empty component");
  const Eigen::Vector2d spacing(grid.spacing.x(), grid.spacing.y());

  std::vector<std::int64_t> sorted(voxels.begin(), voxels.end());
  if (!std::is_sorted(sorted.begin(), sorted.end())) std::sort(sorted.begin(), sorted.end());

  NodeMeasurement m;
  m.component_index = component_index;
  m.voxel_count = std::ssize(sorted);
  m.volume_mm3 = double(m.voxel_count) * grid.spacing.prod();
  m.sad_mm = -1.0;

  // Raster order groups voxels by slice, then by row.
  std::vector<std::int64_t> rows, row_min, row_max;
  std::size_t at = 0;
  while (at < sorted.size()) {
    const std::int64_t slice = grid.unravel(sorted[at])[2];
    rows.clear();
    row_min.clear();
    row_max.clear();
    for (; at < sorted.size(); ++at) {
      const Index3 idx = grid.unravel(sorted[at]);
      if (idx[2] != slice) break;
      if (rows.empty() || rows.back() != idx[1]) {
        rows.push_back(idx[1]);
        row_min.push_back(idx[0]);
        row_max.push_back(idx[0]);
      } else {
        row_min.back() = std::min(row_min.back(), idx[0]);
        row_max.back() = std::max(row_max.back(), idx[0]);
      }
    }
    const SliceShape shape = measure_slice(row_min, row_max, rows, spacing);
    if (shape.width > m.sad_mm) {
      m.sad_mm = shape.width;
      m.sad_slice_index = slice;
      m.long_axis_mm = shape.diameter;
    }
  }
  return m;
}

std::vector<NodeMeasurement> measure_components(const ComponentSet& set) {
  std::vector<NodeMeasurement> out;
  out.reserve(static_cast<std::size_t>(set.count()));
  for (std::int64_t id = 1; id <= set.count(); ++id) {
    out.push_back(measure_node(set.voxels(id), set.grid(), id));
  }
  return out;
}

}  // namespace nodemetry
