#include <gtest/gtest.h>

#include "nodemetry/connected_components.hpp"
#include "nodemetry/phantom.hpp"

namespace nodemetry {
namespace {

std::int64_t count_label(const LabelVolume& labels, std::uint8_t id) {
  return std::count(labels.data().begin(), labels.data().end(), id);
}

PhantomNode node(double x, double y, double z, double a, double b, double c, double rot = 0) {
  return {Eigen::Vector3d(x, y, z), Eigen::Vector3d(a, b, c), rot};
}

TEST(Phantom, ExpectedSadIsTwiceMinInPlaneSemiaxis) {
  PhantomSpec spec;
  spec.dims = {40, 40, 30};
  spec.nodes = {node(20, 20, 15, 9, 3, 6)};
  const auto ph = generate(spec);
  ASSERT_EQ(ph.expected.size(), 1u);
  EXPECT_DOUBLE_EQ(ph.expected[0].sad_mm, 6.0);
  EXPECT_DOUBLE_EQ(ph.expected[0].long_axis_mm, 18.0);
  EXPECT_EQ(ph.expected[0].sad_slice_index, 15);

  spec.nodes = {node(20, 20, 15, 9, 3, 6, 45)};
  EXPECT_DOUBLE_EQ(generate(spec).expected[0].sad_mm, 6.0);
}

TEST(Phantom, VoxelCenterInclusion) {
  PhantomSpec spec;
  spec.dims = {8, 8, 8};
  spec.nodes = {node(3, 3, 3, 0.4, 0.4, 0.4)};
  const auto ph = generate(spec);
  EXPECT_EQ(count_foreground(ph.mask()), 1);
  EXPECT_EQ(ph.instances(3, 3, 3), 1);

  // Small node between voxel centers contains none.
  spec.nodes = {node(3.5, 3.5, 3.5, 0.4, 0.4, 0.4)};
  EXPECT_THROW(generate(spec), ValidationError);
}

TEST(Phantom, RejectsOverlapAndOutOfGrid) {
  PhantomSpec spec;
  spec.dims = {32, 32, 32};
  spec.nodes = {node(10, 16, 16, 5, 5, 5), node(18, 16, 16, 5, 5, 5)};
  EXPECT_THROW(generate(spec), ValidationError);
  spec.nodes = {node(10, 16, 16, 5, 5, 5), node(21, 16, 16, 5, 5, 5)};  // touching faces
  EXPECT_THROW(generate(spec), ValidationError);
  spec.nodes = {node(3, 16, 16, 5, 5, 5)};
  EXPECT_THROW(generate(spec), ValidationError);
  spec.nodes = {node(16, 16, 16, 0, 5, 5)};
  EXPECT_THROW(generate(spec), ValidationError);
}

TEST(Phantom, Deterministic) {
  RandomPhantomOptions opt;
  opt.node_count = 5;
  opt.seed = 12;
  const auto a = generate(random_phantom_spec(opt));
  const auto b = generate(random_phantom_spec(opt));
  EXPECT_EQ(a.instances, b.instances);
  opt.seed = 13;
  EXPECT_NE(generate(random_phantom_spec(opt)).instances, a.instances);
}

TEST(Phantom, NodeCountEqualsComponentCount) {
  RandomPhantomOptions opt;
  opt.dims = {80, 80, 60};
  opt.spacing_mm = Eigen::Vector3d(0.8, 0.8, 1.5);
  opt.node_count = 7;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    opt.seed = seed;
    const auto ph = generate(random_phantom_spec(opt));
    const auto set = label_components(ph.mask(), Connectivity::k26);
    EXPECT_EQ(set.count(), 7);
    for (std::int64_t i = 0; i < 7; ++i) {
      EXPECT_EQ(ph.expected[static_cast<std::size_t>(i)].voxel_count,
                count_label(ph.instances, std::uint8_t(i + 1)));
    }
  }
}

TEST(Phantom, ParseSpec) {
  const auto spec = parse_phantom_spec(
      "# test\ndims = 30 20 10\nspacing = 0.5 0.5 2\nseed = 4\nnode = 7 5 10 2 1 3 30\n");
  EXPECT_EQ(spec.dims, (Index3{30, 20, 10}));
  EXPECT_EQ(spec.spacing_mm, Eigen::Vector3d(0.5, 0.5, 2));
  ASSERT_EQ(spec.nodes.size(), 1u);
  EXPECT_EQ(spec.nodes[0].rotation_deg, 30);
  EXPECT_THROW(parse_phantom_spec("dims = 1 2\n"), ValidationError);
  EXPECT_THROW(parse_phantom_spec("colour = red\n"), ValidationError);
}

}  // namespace
}  // namespace nodemetry
