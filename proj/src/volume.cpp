#include "nodemetry/volume.hpp"

#include <sstream>

namespace nodemetry {

namespace {

constexpr double kGridTolerance = 1e-4;

bool close_relative(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1.0});
  return std::abs(a - b) <= kGridTolerance * scale;
}

}  // namespace

Grid Grid::from_spacing(const Index3& dims, const Eigen::Vector3d& spacing) {
  Grid grid;
  grid.dims = dims;
  grid.spacing = spacing;
  grid.affine.setZero();
  grid.affine.diagonal() = spacing;
  return grid;
}

void Grid::validate() const {
  for (int axis = 0; axis < 3; ++axis) {
    if (dims[axis] < 1) {
      throw ValidationError("grid dimension " + std::to_string(axis) + " is " +
                            std::to_string(dims[axis]) + ", must be >= 1");
    }
    if (!(spacing[axis] > 0.0)) {
      throw ValidationError("grid spacing along axis " + std::to_string(axis) +
                            " must be positive");
    }
  }
}

Eigen::Vector3d world_coords(const Grid& grid, const Index3& index) {
  if (!grid.contains(index)) {
    std::ostringstream msg;
    msg << "voxel index (" << index[0] << ", " << index[1] << ", " << index[2]
        << ") outside grid " << grid.dims[0] << "x" << grid.dims[1] << "x" << grid.dims[2];
    throw RangeError(msg.str());
  }
  const Eigen::Vector4d homogeneous(static_cast<double>(index[0]), static_cast<double>(index[1]),
                                    static_cast<double>(index[2]), 1.0);
  return grid.affine * homogeneous;
}

void assert_same_grid(const Grid& a, const Grid& b) {
  for (int axis = 0; axis < 3; ++axis) {
    if (a.dims[axis] != b.dims[axis]) {
      throw GridMismatchError("grid mismatch: dims differ along axis " + std::to_string(axis) +
                              " (" + std::to_string(a.dims[axis]) + " vs " +
                              std::to_string(b.dims[axis]) + ")");
    }
  }
  for (int axis = 0; axis < 3; ++axis) {
    if (!close_relative(a.spacing[axis], b.spacing[axis])) {
      std::ostringstream msg;
      msg << "grid mismatch: spacing differs along axis " << axis << " (" << a.spacing[axis]
          << " vs " << b.spacing[axis] << ")";
      throw GridMismatchError(msg.str());
    }
  }
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 3; ++r) {
      if (!close_relative(a.affine(r, c), b.affine(r, c))) {
        std::ostringstream msg;
        msg << "grid mismatch: affine element (" << r << ", " << c << ") differs ("
            << a.affine(r, c) << " vs " << b.affine(r, c) << ")";
        throw GridMismatchError(msg.str());
      }
    }
  }
}

AxisPermutation canonical_orientation(const Grid& grid) {
  const Eigen::Matrix3d direction = grid.affine.leftCols<3>();
  // Pick the voxel-axis -> world-axis assignment with the largest total
  // alignment; oblique grids still get a unique axis per direction.
  std::array<int, 3> order{0, 1, 2};
  std::array<int, 3> best = order;
  double best_score = -1.0;
  do {
    double score = 0.0;
    for (int d = 0; d < 3; ++d) score += std::abs(direction(d, order[d])) / direction.col(order[d]).norm();
    if (score > best_score + 1e-12) {
      best_score = score;
      best = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));

  AxisPermutation perm;
  perm.source_axis = best;
  for (int d = 0; d < 3; ++d) perm.flipped[d] = direction(d, best[d]) < 0.0;
  return perm;
}

bool is_axial_last(const Grid& grid) { return canonical_orientation(grid).source_axis[2] == 2; }

Grid permute_grid(const Grid& grid, const AxisPermutation& perm) {
  Grid out;
  Eigen::Vector3d origin = grid.affine.col(3);
  for (int d = 0; d < 3; ++d) {
    const int s = perm.source_axis[d];
    out.dims[d] = grid.dims[s];
    out.spacing[d] = grid.spacing[s];
    Eigen::Vector3d column = grid.affine.col(s);
    if (perm.flipped[d]) {
      origin += column * double(grid.dims[s] - 1);
      column = -column;
    }
    out.affine.col(d) = column;
  }
  out.affine.col(3) = origin;
  return out;
}

std::int64_t count_foreground(const MaskVolume& mask) {
  std::int64_t count = 0;
  for (const auto value : mask.data()) count += value != 0;
  return count;
}

}  // namespace nodemetry
