#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nodemetry/error.hpp"

namespace nodemetry {

using Index3 = std::array<std::int64_t, 3>;
using Affine = Eigen::Matrix<double, 3, 4>;

/// Geometry of a voxel grid: extent, physical voxel size and the
/// voxel-index -> world (mm) transform. Data is stored x-fastest.
struct Grid {
  Index3 dims{1, 1, 1};
  Eigen::Vector3d spacing = Eigen::Vector3d::Ones();
  Affine affine = Affine::Identity();

  /// Diagonal affine from spacing, origin at voxel (0,0,0).
  static Grid from_spacing(const Index3& dims, const Eigen::Vector3d& spacing);

  std::int64_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }
  std::int64_t slice_stride() const { return dims[0] * dims[1]; }

  std::int64_t linear_index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return i + dims[0] * (j + dims[1] * k);
  }
  Index3 unravel(std::int64_t index) const {
    const std::int64_t i = index % dims[0];
    const std::int64_t rest = index / dims[0];
    return {i, rest % dims[1], rest / dims[1]};
  }
  bool contains(const Index3& index) const {
    for (int axis = 0; axis < 3; ++axis) {
      if (index[axis] < 0 || index[axis] >= dims[axis]) return false;
    }
    return true;
  }

  /// Throws ValidationError unless dims >= 1 and spacing > 0.
  void validate() const;

  bool operator==(const Grid& other) const {
    return dims == other.dims && spacing == other.spacing && affine == other.affine;
  }
};

/// World position (mm) of a voxel center. Throws RangeError outside the grid.
Eigen::Vector3d world_coords(const Grid& grid, const Index3& index);

/// Throws GridMismatchError naming the first differing field unless dims
/// are equal and spacing/affine agree within 1e-4 relative tolerance.
void assert_same_grid(const Grid& a, const Grid& b);

/// Dense voxel grid templated on the stored scalar.
template <typename Scalar>
class Volume {
 public:
  using value_type = Scalar;

  Volume() = default;

  explicit Volume(Grid grid, Scalar fill = Scalar{}) : grid_(std::move(grid)) {
    grid_.validate();
    data_.assign(static_cast<std::size_t>(grid_.voxel_count()), fill);
  }

  Volume(Grid grid, std::vector<Scalar> data) : grid_(std::move(grid)), data_(std::move(data)) {
    grid_.validate();
    if (static_cast<std::int64_t>(data_.size()) != grid_.voxel_count()) {
      throw ValidationError("volume data length " + std::to_string(data_.size()) +
                            " does not match grid voxel count " +
                            std::to_string(grid_.voxel_count()));
    }
  }

  const Grid& grid() const { return grid_; }
  const Index3& dims() const { return grid_.dims; }
  const Eigen::Vector3d& spacing() const { return grid_.spacing; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::span<const Scalar> data() const { return data_; }
  std::span<Scalar> data() { return data_; }
  std::vector<Scalar>& storage() { return data_; }

  Scalar operator[](std::int64_t index) const { return data_[static_cast<std::size_t>(index)]; }
  Scalar& operator[](std::int64_t index) { return data_[static_cast<std::size_t>(index)]; }

  Scalar operator()(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return data_[static_cast<std::size_t>(grid_.linear_index(i, j, k))];
  }
  Scalar& operator()(std::int64_t i, std::int64_t j, std::int64_t k) {
    return data_[static_cast<std::size_t>(grid_.linear_index(i, j, k))];
  }

  auto array() const {
    return Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>>(data_.data(), size());
  }

  bool operator==(const Volume& other) const = default;

 private:
  Grid grid_;
  std::vector<Scalar> data_;
};

using LabelVolume = Volume<std::uint8_t>;
/// Binary mask: any nonzero value is foreground.
using MaskVolume = Volume<std::uint8_t>;
using ScalarVolume = Volume<float>;

/// Per-class probabilities stored as contiguous class planes.
template <typename Scalar = float>
class ProbabilityVolume {
 public:
  ProbabilityVolume() = default;

  ProbabilityVolume(Grid grid, int classes, Scalar fill = Scalar{})
      : grid_(std::move(grid)), classes_(classes) {
    grid_.validate();
    if (classes < 1) throw ValidationError("probability volume needs at least one class");
    planes_.assign(static_cast<std::size_t>(grid_.voxel_count() * classes), fill);
  }

  /// Builds from one scalar volume per class; all must share a grid.
  static ProbabilityVolume from_channels(std::span<const Volume<Scalar>> channels) {
    if (channels.empty()) throw ValidationError("probability volume needs at least one class");
    ProbabilityVolume out(channels.front().grid(), static_cast<int>(channels.size()));
    for (std::size_t c = 0; c < channels.size(); ++c) {
      assert_same_grid(channels.front().grid(), channels[c].grid());
      std::ranges::copy(channels[c].data(), out.channel(static_cast<int>(c)).begin());
    }
    return out;
  }

  const Grid& grid() const { return grid_; }
  int classes() const { return classes_; }
  std::int64_t voxel_count() const { return grid_.voxel_count(); }

  std::span<const Scalar> channel(int c) const {
    return std::span<const Scalar>(planes_).subspan(plane_offset(c), plane_size());
  }
  std::span<Scalar> channel(int c) {
    return std::span<Scalar>(planes_).subspan(plane_offset(c), plane_size());
  }

  Scalar operator()(std::int64_t voxel, int c) const {
    return planes_[plane_offset(c) + static_cast<std::size_t>(voxel)];
  }
  Scalar& operator()(std::int64_t voxel, int c) {
    return planes_[plane_offset(c) + static_cast<std::size_t>(voxel)];
  }

  Volume<Scalar> channel_volume(int c) const {
    auto plane = channel(c);
    return Volume<Scalar>(grid_, std::vector<Scalar>(plane.begin(), plane.end()));
  }

  /// Throws ValidationError if a value leaves [0,1] or a voxel's class sum
  /// is further than `tolerance` from 1.
  void validate(double tolerance = 1e-5) const {
    const std::int64_t n = voxel_count();
    for (const Scalar value : planes_) {
      if (!(value >= Scalar(0) && value <= Scalar(1))) {
        throw ValidationError("probability outside [0,1]: " + std::to_string(double(value)));
      }
    }
    for (std::int64_t v = 0; v < n; ++v) {
      double sum = 0.0;
      for (int c = 0; c < classes_; ++c) sum += double((*this)(v, c));
      if (std::abs(sum - 1.0) > tolerance) {
        throw ValidationError("class probabilities at voxel " + std::to_string(v) +
                              " sum to " + std::to_string(sum));
      }
    }
  }

  bool operator==(const ProbabilityVolume& other) const = default;

 private:
  std::size_t plane_size() const { return static_cast<std::size_t>(grid_.voxel_count()); }
  std::size_t plane_offset(int c) const {
    if (c < 0 || c >= classes_) throw RangeError("class index " + std::to_string(c) + " out of range");
    return static_cast<std::size_t>(c) * plane_size();
  }

  Grid grid_;
  int classes_ = 0;
  std::vector<Scalar> planes_;
};

/// Axis reorder + sign flips mapping a grid onto right-handed, axial-last
/// index order. `source_axis[d]` is the input axis that becomes output axis d.
struct AxisPermutation {
  std::array<int, 3> source_axis{0, 1, 2};
  std::array<bool, 3> flipped{false, false, false};

  bool is_identity() const {
    return source_axis == std::array<int, 3>{0, 1, 2} &&
           flipped == std::array<bool, 3>{false, false, false};
  }
};

/// Permutation implied by the dominant world direction of each voxel axis.
AxisPermutation canonical_orientation(const Grid& grid);

/// True when the third voxel axis is the dominant superior-inferior axis.
bool is_axial_last(const Grid& grid);

Grid permute_grid(const Grid& grid, const AxisPermutation& perm);

/// Lossless reorientation (no interpolation): afterwards axis 2 indexes
/// axial slices and every axis runs along +x/+y/+z in world space.
template <typename Scalar>
Volume<Scalar> canonicalize(const Volume<Scalar>& volume) {
  const AxisPermutation perm = canonical_orientation(volume.grid());
  if (perm.is_identity()) return volume;
  const Grid& in = volume.grid();
  Volume<Scalar> out(permute_grid(in, perm));
  const Index3& od = out.dims();
  Index3 src{};
  for (std::int64_t k = 0; k < od[2]; ++k) {
    for (std::int64_t j = 0; j < od[1]; ++j) {
      for (std::int64_t i = 0; i < od[0]; ++i) {
        const Index3 dst{i, j, k};
        for (int d = 0; d < 3; ++d) {
          const int s = perm.source_axis[d];
          src[s] = perm.flipped[d] ? od[d] - 1 - dst[d] : dst[d];
        }
        out(i, j, k) = volume(src[0], src[1], src[2]);
      }
    }
  }
  return out;
}

/// 0/1 mask of voxels whose value is nonzero.
template <typename Scalar>
MaskVolume binarize(const Volume<Scalar>& volume) {
  MaskVolume out(volume.grid());
  auto src = volume.data();
  auto dst = out.data();
  for (std::size_t v = 0; v < src.size(); ++v) dst[v] = src[v] != Scalar{} ? 1 : 0;
  return out;
}

std::int64_t count_foreground(const MaskVolume& mask);

}  // namespace nodemetry
