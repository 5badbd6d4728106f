#include <gtest/gtest.h>

#include <random>

#include "nodemetry/label_fusion.hpp"
#include "test_support.hpp"

namespace nodemetry {
namespace {

// Sequential replay: walk the precedence list, painting every source of each
// class in turn, then the LN mask.
LabelVolume replay(const std::vector<StructureMask>& anatomy, const MaskVolume& ln, const FusionSpec& spec) {
  LabelVolume out(ln.grid());
  for (const ClassId id : spec.precedence) {
    if (id == spec.lymph_node_class) continue;
    for (const auto& s : anatomy) {
      if (spec.group_map.at(s.name) != id) continue;
      for (std::int64_t v = 0; v < out.size(); ++v) {
        if (s.mask[v]) out[v] = id;
      }
    }
  }
  for (std::int64_t v = 0; v < out.size(); ++v) {
    if (ln[v]) out[v] = spec.lymph_node_class;
  }
  return out;
}

TEST(FusionSpec, DefaultMatchesPublishedClasses) {
  const FusionSpec spec = default_fusion_spec();
  EXPECT_EQ(spec.class_count, 29);
  EXPECT_EQ(spec.target("spleen"), 3);
  EXPECT_EQ(spec.target("trachea"), 16);
  EXPECT_EQ(spec.target("pulmonary_artery"), 18);
  EXPECT_EQ(spec.target("kidney_left"), 4);
  EXPECT_EQ(spec.target("kidney_right"), 4);
  EXPECT_EQ(spec.target("lung_upper_lobe_left"), 13);
  EXPECT_EQ(spec.target("vertebrae_T4"), 14);
  EXPECT_EQ(spec.target("urinary_bladder"), 29);
  EXPECT_EQ(spec.lymph_node_class, 2);
  EXPECT_EQ(spec.precedence.back(), 2);
  EXPECT_THROW(spec.target("not_a_structure"), MappingError);
}

TEST(FusionSpec, SharedIdAccepted) {
  const auto spec = parse_fusion_spec("lymph_nodes = 2\nbody = 1\nkidney_left = 3\nkidney_right = 3\n");
  EXPECT_EQ(spec.class_count, 3);
  EXPECT_EQ(spec.target("kidney_left"), spec.target("kidney_right"));
}

TEST(FusionSpec, GapListsMissingId) {
  try {
    parse_fusion_spec("lymph_nodes = 3\nbody = 1\n");
    FAIL() << "gap accepted";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("missing id(s) 2"), std::string::npos) << e.what();
  }
}

TEST(FusionSpec, RejectsDuplicateAndBackground) {
  EXPECT_THROW(parse_fusion_spec("lymph_nodes = 2\nbody = 1\nbody = 1\n"), ValidationError);
  EXPECT_THROW(parse_fusion_spec("lymph_nodes = 2\nbody = 1\nair = 0\n"), ValidationError);
  EXPECT_THROW(parse_fusion_spec("body = 1\n"), ValidationError);
  EXPECT_THROW(parse_fusion_spec("lymph_nodes = 2\nbody = 1\n[precedence]\n2 1\n"), ValidationError);
}

TEST(FusionSpec, PrecedenceSectionParsed) {
  const auto spec = parse_fusion_spec(
      "# comment\nlymph_nodes = 2\nliver = 1\nvessel = 3\n[precedence]\n3, 1\n2\n");
  EXPECT_EQ(spec.precedence, (std::vector<ClassId>{3, 1, 2}));
  EXPECT_GT(spec.rank(1), spec.rank(3));
}

TEST(Fuse, SingleSourceAndEmpty) {
  const Grid g = Grid::from_spacing({4, 4, 4}, Eigen::Vector3d::Ones());
  const FusionSpec spec = default_fusion_spec();
  MaskVolume spleen(g);
  spleen(1, 1, 1) = 1;
  const std::vector<StructureMask> anatomy{{"spleen", spleen}};
  const LabelVolume out = fuse(anatomy, MaskVolume(g), spec);
  EXPECT_EQ(out(1, 1, 1), 3);
  EXPECT_EQ(count_foreground(out), 1);
  EXPECT_EQ(count_foreground(fuse({}, MaskVolume(g), spec)), 0);
}

TEST(Fuse, LymphNodeOverridesOrgan) {
  const Grid g = Grid::from_spacing({4, 4, 4}, Eigen::Vector3d::Ones());
  MaskVolume liver(g, 1), ln(g);
  ln(2, 2, 2) = 1;
  const std::vector<StructureMask> anatomy{{"liver", liver}};
  const LabelVolume out = fuse(anatomy, ln, default_fusion_spec());
  EXPECT_EQ(out(2, 2, 2), kLymphNodeClass);
  EXPECT_EQ(out(0, 0, 0), 6);
  EXPECT_EQ(extract_class(out, kLymphNodeClass), ln);
  EXPECT_EQ(count_foreground(extract_class(out, 9)), 0);
  EXPECT_EQ(count_foreground(extract_class(out, 0)), 0);
}

TEST(Fuse, UnknownStructureNamed) {
  const Grid g = Grid::from_spacing({2, 2, 2}, Eigen::Vector3d::Ones());
  const std::vector<StructureMask> anatomy{{"mystery_organ", MaskVolume(g, 1)}};
  try {
    fuse(anatomy, MaskVolume(g), default_fusion_spec());
    FAIL();
  } catch (const MappingError& e) {
    EXPECT_NE(std::string(e.what()).find("mystery_organ"), std::string::npos);
  }
}

TEST(Fuse, GridMismatchPropagates) {
  const std::vector<StructureMask> anatomy{
      {"liver", MaskVolume(Grid::from_spacing({3, 2, 2}, Eigen::Vector3d::Ones()))}};
  EXPECT_THROW(fuse(anatomy, MaskVolume(Grid::from_spacing({2, 2, 2}, Eigen::Vector3d::Ones())),
                    default_fusion_spec()),
               GridMismatchError);
}

TEST(Fuse, RandomScenesMatchReplay) {
  std::mt19937_64 rng(1234);
  const FusionSpec spec = default_fusion_spec();
  const std::vector<std::string> names{"liver", "aorta", "heart_myocardium", "trachea", "body",
                                       "vertebrae_T5", "esophagus", "lung_lower_lobe_right", "spleen"};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<StructureMask> anatomy;
    for (const auto& n : names) anatomy.push_back({n, testing::random_mask({16, 16, 16}, 0.3, rng)});
    std::shuffle(anatomy.begin(), anatomy.end(), rng);
    const MaskVolume ln = testing::random_mask({16, 16, 16}, 0.1, rng);
    const LabelVolume expected = replay(anatomy, ln, spec);
    EXPECT_EQ(fuse(anatomy, ln, spec, 1), expected);
    EXPECT_EQ(fuse(anatomy, ln, spec, 4), expected);

    const MaskVolume extracted = extract_class(expected, kLymphNodeClass);
    for (std::int64_t v = 0; v < ln.size(); ++v) {
      if (ln[v]) {
        EXPECT_TRUE(extracted[v]);
      }
    }
    // Class masks partition the grid.
    std::int64_t total = 0;
    for (int c = 0; c <= spec.class_count; ++c) total += count_foreground(extract_class(expected, ClassId(c)));
    EXPECT_EQ(total, expected.size());
  }
}

}  // namespace
}  // namespace nodemetry
