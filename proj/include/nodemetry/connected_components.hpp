#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nodemetry/volume.hpp"

namespace nodemetry {

enum class Connectivity : int { k6 = 6, k18 = 18, k26 = 26 };

/// Throws ValidationError for anything but 6, 18 or 26.
Connectivity connectivity_from_int(int value);

/// Labeled 3D components of a binary mask. Component ids run 1..count in
/// order of each component's first voxel in raster (x-fastest) order.
/// Maximal run of one component's voxels along x on a single row.
struct Run {
  std::int64_t start = 0;  // linear index of the first voxel
  std::int64_t length = 0;
  std::uint32_t id = 0;

  bool operator==(const Run&) const = default;
};

class ComponentSet {
 public:
  ComponentSet() = default;
  /// `runs` in raster order with ids in 1..count.
  ComponentSet(Connectivity connectivity, Grid grid, std::vector<Run> runs, std::int64_t count);

  std::int64_t count() const { return static_cast<std::int64_t>(offsets_.size()) - 1; }
  Connectivity connectivity() const { return connectivity_; }
  const Grid& grid() const { return grid_; }

  /// Dense id grid built on demand: 0 = background, otherwise the id.
  Volume<std::uint32_t> component_of() const;

  /// All runs in raster order.
  std::span<const Run> runs() const { return runs_; }

  /// Linear voxel indices of component `id` (1-based), ascending.
  std::span<const std::int64_t> voxels(std::int64_t id) const;
  std::int64_t size(std::int64_t id) const;

 private:
  Connectivity connectivity_ = Connectivity::k26;
  Grid grid_;
  std::vector<Run> runs_;
  std::vector<std::int64_t> offsets_{0};
  std::vector<std::int64_t> voxels_;
};

/// Union-find labeling over foreground runs; cost scales with the mask
/// size for the scan and with the foreground for everything else.
ComponentSet label_components(const MaskVolume& mask, Connectivity connectivity = Connectivity::k26);

/// Drops components smaller than `min_voxels` and re-densifies ids.
ComponentSet filter_components(const ComponentSet& set, std::int64_t min_voxels);

/// Backward half of the neighborhood (13, 9 or 3 offsets as (di, dj, dk)).
std::span<const Index3> backward_offsets(Connectivity connectivity);

}  // namespace nodemetry
