#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "nodemetry/volume.hpp"

namespace nodemetry {
namespace {

TEST(WorldCoords, IdentityOrigin) {
  const Grid g = Grid::from_spacing({4, 4, 4}, Eigen::Vector3d::Ones());
  EXPECT_EQ(world_coords(g, {0, 0, 0}), Eigen::Vector3d::Zero());
}

TEST(WorldCoords, AnisotropicSpacing) {
  const Grid g = Grid::from_spacing({20, 20, 20}, Eigen::Vector3d(0.8, 0.8, 1.5));
  const Eigen::Vector3d p = world_coords(g, {10, 0, 0});
  EXPECT_NEAR(p.x(), 8.0, 1e-12);
  EXPECT_EQ(p.y(), 0.0);
  EXPECT_EQ(p.z(), 0.0);
}

TEST(WorldCoords, OffByOneIsRangeError) {
  const Grid g = Grid::from_spacing({4, 5, 6}, Eigen::Vector3d::Ones());
  EXPECT_THROW(world_coords(g, {0, 0, 6}), RangeError);
  EXPECT_THROW(world_coords(g, {-1, 0, 0}), RangeError);
  EXPECT_NO_THROW(world_coords(g, {3, 4, 5}));
}

TEST(WorldCoords, IsAffine) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 2);
  Grid g = Grid::from_spacing({30, 30, 30}, Eigen::Vector3d(0.7, 0.9, 2.0));
  g.affine = Affine::NullaryExpr([&] { return u(rng); });
  const Index3 b{3, 1, 2};
  const Eigen::Vector3d step = world_coords(g, {b[0], b[1], b[2]}) - world_coords(g, {0, 0, 0});
  for (const Index3 a : {Index3{0, 0, 0}, Index3{5, 7, 11}, Index3{20, 3, 9}}) {
    const Eigen::Vector3d d = world_coords(g, {a[0] + b[0], a[1] + b[1], a[2] + b[2]}) - world_coords(g, a);
    EXPECT_LT((d - step).norm(), 1e-12);
  }
}

TEST(AssertSameGrid, SelfSucceeds) {
  const Grid g = Grid::from_spacing({512, 512, 241}, Eigen::Vector3d(0.7, 0.7, 1.25));
  EXPECT_NO_THROW(assert_same_grid(g, g));
}

TEST(AssertSameGrid, NamesDifferingAxis) {
  const Grid a = Grid::from_spacing({512, 512, 241}, Eigen::Vector3d::Ones());
  const Grid b = Grid::from_spacing({512, 512, 242}, Eigen::Vector3d::Ones());
  try {
    assert_same_grid(a, b);
    FAIL() << "expected a grid mismatch";
  } catch (const GridMismatchError& e) {
    EXPECT_NE(std::string(e.what()).find("axis 2"), std::string::npos) << e.what();
  }
}

TEST(AssertSameGrid, ToleratesTinySpacingNoise) {
  const Grid a = Grid::from_spacing({8, 8, 8}, Eigen::Vector3d(0.8, 0.8, 1.5));
  const Grid b = Grid::from_spacing({8, 8, 8}, Eigen::Vector3d(0.8 + 1e-6, 0.8, 1.5));
  EXPECT_NO_THROW(assert_same_grid(a, b));
  const Grid c = Grid::from_spacing({8, 8, 8}, Eigen::Vector3d(0.81, 0.8, 1.5));
  EXPECT_THROW(assert_same_grid(a, c), GridMismatchError);
}

TEST(Volume, RejectsBadConstruction) {
  EXPECT_THROW(LabelVolume(Grid::from_spacing({0, 4, 4}, Eigen::Vector3d::Ones())), ValidationError);
  EXPECT_THROW(LabelVolume(Grid::from_spacing({4, 4, 4}, Eigen::Vector3d::Ones()), std::vector<std::uint8_t>(10)),
               ValidationError);
}

TEST(ProbabilityVolume, ValidateChecksRangeAndSums) {
  const Grid g = Grid::from_spacing({2, 2, 1}, Eigen::Vector3d::Ones());
  ProbabilityVolume<float> p(g, 2, 0.5f);
  EXPECT_NO_THROW(p.validate());
  p(0, 0) = 0.7f;
  EXPECT_THROW(p.validate(), ValidationError);
  p(0, 0) = 1.5f;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Canonicalize, AxialLastAfterPermutation) {
  // Voxel axes stored as (z, x, y) in world terms with a flip on y.
  Grid g;
  g.dims = {3, 4, 5};
  g.spacing = Eigen::Vector3d(2.0, 1.0, 0.5);
  g.affine.setZero();
  g.affine(2, 0) = 2.0;   // voxel axis 0 -> world z
  g.affine(0, 1) = 1.0;   // voxel axis 1 -> world x
  g.affine(1, 2) = -0.5;  // voxel axis 2 -> world -y
  g.affine.col(3) = Eigen::Vector3d(10, 20, 30);
  EXPECT_FALSE(is_axial_last(g));

  Volume<std::int32_t> vol(g);
  for (std::int64_t v = 0; v < vol.size(); ++v) vol[v] = static_cast<std::int32_t>(v);
  const auto canon = canonicalize(vol);
  EXPECT_TRUE(canonical_orientation(canon.grid()).is_identity());
  EXPECT_EQ(canon.dims(), (Index3{4, 5, 3}));
  EXPECT_EQ(canon.spacing(), Eigen::Vector3d(1.0, 0.5, 2.0));
  // Every voxel keeps its world position and value.
  for (std::int64_t k = 0; k < 3; ++k) {
    for (std::int64_t j = 0; j < 5; ++j) {
      for (std::int64_t i = 0; i < 4; ++i) {
        const Eigen::Vector3d w = world_coords(canon.grid(), {i, j, k});
        const Eigen::Vector3d src = g.affine.leftCols<3>().colPivHouseholderQr().solve(w - g.affine.col(3));
        const Index3 s{std::llround(src[0]), std::llround(src[1]), std::llround(src[2])};
        EXPECT_EQ(canon(i, j, k), vol(s[0], s[1], s[2]));
      }
    }
  }
}

}  // namespace
}  // namespace nodemetry
