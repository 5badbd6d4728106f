#include <gtest/gtest.h>

#include <random>

#include "nodemetry/connected_components.hpp"
#include "test_support.hpp"

namespace nodemetry {
namespace {

std::set<std::vector<std::int64_t>> partition_of(const ComponentSet& set) {
  std::set<std::vector<std::int64_t>> parts;
  for (std::int64_t id = 1; id <= set.count(); ++id) {
    const auto v = set.voxels(id);
    parts.emplace(v.begin(), v.end());
  }
  return parts;
}

MaskVolume corner_pair() {
  MaskVolume mask(Grid::from_spacing({3, 3, 3}, Eigen::Vector3d::Ones()));
  mask(0, 0, 0) = 1;
  mask(1, 1, 1) = 1;
  return mask;
}

TEST(ConnectedComponents, DiagonalCornerDependsOnConnectivity) {
  EXPECT_EQ(label_components(corner_pair(), Connectivity::k26).count(), 1);
  EXPECT_EQ(label_components(corner_pair(), Connectivity::k18).count(), 2);
  EXPECT_EQ(label_components(corner_pair(), Connectivity::k6).count(), 2);
}

TEST(ConnectedComponents, EdgeNeighbourAt18) {
  MaskVolume mask(Grid::from_spacing({3, 3, 3}, Eigen::Vector3d::Ones()));
  mask(0, 0, 0) = 1;
  mask(1, 1, 0) = 1;
  EXPECT_EQ(label_components(mask, Connectivity::k18).count(), 1);
  EXPECT_EQ(label_components(mask, Connectivity::k6).count(), 2);
}

TEST(ConnectedComponents, EmptyMask) {
  const MaskVolume mask(Grid::from_spacing({4, 4, 4}, Eigen::Vector3d::Ones()));
  const auto set = label_components(mask);
  EXPECT_EQ(set.count(), 0);
  EXPECT_THROW(set.voxels(1), RangeError);
}

TEST(ConnectedComponents, IdsFollowRasterOrder) {
  MaskVolume mask(Grid::from_spacing({6, 1, 1}, Eigen::Vector3d::Ones()));
  mask(1, 0, 0) = 1;
  mask(3, 0, 0) = 1;
  mask(5, 0, 0) = 1;
  const auto set = label_components(mask);
  ASSERT_EQ(set.count(), 3);
  EXPECT_EQ(set.voxels(1)[0], 1);
  EXPECT_EQ(set.voxels(2)[0], 3);
  EXPECT_EQ(set.voxels(3)[0], 5);
  EXPECT_EQ(set.component_of()[3], 2u);
}

TEST(ConnectedComponents, UShapeMergesLate) {
  // Two arms join only at the bottom row: a provisional-label merge.
  MaskVolume mask(Grid::from_spacing({5, 4, 1}, Eigen::Vector3d::Ones()));
  for (int j = 0; j < 4; ++j) mask(0, j, 0) = mask(4, j, 0) = 1;
  for (int i = 0; i < 5; ++i) mask(i, 3, 0) = 1;
  EXPECT_EQ(label_components(mask, Connectivity::k6).count(), 1);
}

TEST(ConnectedComponents, MatchesFloodFillOnRandomMasks) {
  std::mt19937_64 rng(42);
  for (const int conn : {6, 18, 26}) {
    for (int trial = 0; trial < 10; ++trial) {
      const MaskVolume mask = testing::random_mask({12, 10, 9}, 0.15 + 0.05 * (trial % 5), rng);
      const auto set = label_components(mask, connectivity_from_int(conn));
      EXPECT_EQ(partition_of(set), testing::flood_fill_partition(mask, conn)) << conn << "/" << trial;
      for (std::int64_t id = 1; id <= set.count(); ++id) {
        for (const auto v : set.voxels(id)) EXPECT_EQ(set.component_of()[v], std::uint32_t(id));
      }
    }
  }
}

TEST(ConnectedComponents, ComponentsPartitionForeground) {
  std::mt19937_64 rng(7);
  const MaskVolume mask = testing::random_mask({16, 16, 16}, 0.3, rng);
  const auto set = label_components(mask);
  std::int64_t total = 0;
  for (std::int64_t id = 1; id <= set.count(); ++id) total += set.size(id);
  EXPECT_EQ(total, count_foreground(mask));
}

TEST(ConnectedComponents, FilterDropsSmallAndRenumbers) {
  MaskVolume mask(Grid::from_spacing({9, 1, 1}, Eigen::Vector3d::Ones()));
  mask(0, 0, 0) = 1;                                          // size 1
  mask(2, 0, 0) = mask(3, 0, 0) = mask(4, 0, 0) = 1;          // size 3
  mask(6, 0, 0) = mask(7, 0, 0) = 1;                          // size 2
  const auto set = label_components(mask);
  const auto kept = filter_components(set, 2);
  ASSERT_EQ(kept.count(), 2);
  EXPECT_EQ(kept.size(1), 3);
  EXPECT_EQ(kept.size(2), 2);
  EXPECT_EQ(kept.component_of()[0], 0u);
  EXPECT_EQ(kept.component_of()[7], 2u);
  EXPECT_EQ(filter_components(set, 1).count(), 3);
  EXPECT_THROW(filter_components(set, 0), ValidationError);
}

TEST(ConnectedComponents, RejectsUnknownConnectivity) {
  EXPECT_THROW(connectivity_from_int(8), ValidationError);
  EXPECT_EQ(backward_offsets(Connectivity::k26).size(), 13u);
  EXPECT_EQ(backward_offsets(Connectivity::k18).size(), 9u);
  EXPECT_EQ(backward_offsets(Connectivity::k6).size(), 3u);
}

}  // namespace
}  // namespace nodemetry
