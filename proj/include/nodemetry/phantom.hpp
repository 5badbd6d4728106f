#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nodemetry/morphometry.hpp"
#include "nodemetry/volume.hpp"

namespace nodemetry {

/// Digital ellipsoid node. `rotation_deg` turns the (a, b) semiaxes about
/// the axial axis; c stays along it.
struct PhantomNode {
  Eigen::Vector3d center_mm = Eigen::Vector3d::Zero();
  Eigen::Vector3d semiaxes_mm = Eigen::Vector3d::Ones();
  double rotation_deg = 0.0;
};

struct PhantomSpec {
  Index3 dims{64, 64, 64};
  Eigen::Vector3d spacing_mm = Eigen::Vector3d::Ones();
  std::vector<PhantomNode> nodes;
  std::uint64_t seed = 0;
};

struct Phantom {
  /// Node i (0-based) is stored as label i + 1.
  LabelVolume instances;
  /// Analytic SAD 2*min(a, b), long axis 2*max(a, b); voxel counts from
  /// rasterization. component_index is the 1-based node index.
  std::vector<NodeMeasurement> expected;

  MaskVolume mask() const { return binarize(instances); }
};

/// Rasterizes by voxel-center inclusion. Throws ValidationError for a node
/// leaving the grid, a node containing no voxel center, or two nodes that
/// share or touch voxels (26-neighborhood).
Phantom generate(const PhantomSpec& spec);

/// Ranges for random_phantom_spec.
struct RandomPhantomOptions {
  Index3 dims{64, 64, 64};
  Eigen::Vector3d spacing_mm = Eigen::Vector3d::Ones();
  int node_count = 4;
  double min_semiaxis_mm = 3.0;
  double max_semiaxis_mm = 10.0;
  std::uint64_t seed = 0;
};

/// Seeded placement of non-touching nodes (rejection sampling on bounding
/// spheres plus a one-voxel margin).
PhantomSpec random_phantom_spec(const RandomPhantomOptions& options);

/// Key-value text: `dims = X Y Z`, `spacing = sx sy sz`, `seed = N`, and one
/// `node = cx cy cz a b c rotation_deg` line per node. `random_nodes = N`
/// with optional `semiaxis_range = lo hi` appends seeded random nodes.
PhantomSpec parse_phantom_spec(std::string_view text);

/// Expectations table: node_index, voxel_count, volume_mm3, expected_sad_mm,
/// expected_long_axis_mm, center and semiaxes.
std::string expectations_csv(const PhantomSpec& spec, const Phantom& phantom);

}  // namespace nodemetry
