#include <gtest/gtest.h>

#include <random>

#include "nodemetry/ensemble.hpp"

namespace nodemetry {
namespace {

using Fold = FoldSet<float>;
const Grid kOne = Grid::from_spacing({1, 1, 1}, Eigen::Vector3d::Ones());

ProbabilityVolume<float> point(std::vector<float> probs) {
  ProbabilityVolume<float> p(kOne, static_cast<int>(probs.size()));
  for (int c = 0; c < p.classes(); ++c) p(0, c) = probs[static_cast<std::size_t>(c)];
  return p;
}

LabelVolume label(std::uint8_t value) { return LabelVolume(kOne, value); }

ProbabilityVolume<float> random_probs(const Grid& g, int classes, std::mt19937_64& rng) {
  std::gamma_distribution<float> gamma(0.7f, 1.0f);
  ProbabilityVolume<float> p(g, classes);
  for (std::int64_t v = 0; v < g.voxel_count(); ++v) {
    float sum = 0;
    for (int c = 0; c < classes; ++c) sum += (p(v, c) = gamma(rng) + 1e-6f);
    for (int c = 0; c < classes; ++c) p(v, c) /= sum;
  }
  return p;
}

TEST(Average, TwoFoldMean) {
  const auto out = average_probabilities(Fold({point({0.8f, 0.0f, 0.2f}), point({0.4f, 0.0f, 0.6f})}));
  EXPECT_NEAR(out(0, 2), 0.4f, 1e-7);
  EXPECT_NEAR(out(0, 0), 0.6f, 1e-7);
}

TEST(Average, RejectsMixedInputs) {
  EXPECT_THROW(Fold({point({1.0f}), label(0)}), ValidationError);
  EXPECT_THROW(Fold({point({1.0f, 0.0f}), point({1.0f})}), ValidationError);
  EXPECT_THROW(average_probabilities(Fold({label(0)})), ValidationError);
  EXPECT_THROW(majority_vote(Fold({point({1.0f})})), ValidationError);
  EXPECT_THROW(Fold({label(0), LabelVolume(Grid::from_spacing({2, 1, 1}, Eigen::Vector3d::Ones()))}),
               GridMismatchError);
}

TEST(Average, FiveFoldsStayDistributions) {
  std::mt19937_64 rng(1);
  const Grid g = Grid::from_spacing({6, 5, 4}, Eigen::Vector3d::Ones());
  std::vector<Fold::Member> folds;
  for (int f = 0; f < 5; ++f) folds.emplace_back(random_probs(g, 4, rng));
  EXPECT_NO_THROW(average_probabilities(Fold(folds)).validate());
}

TEST(Argmax, TieGoesToSmallestClass) {
  EXPECT_EQ(argmax_labels(point({0.4f, 0.4f, 0.2f}))[0], 0);
  EXPECT_EQ(argmax_labels(point({0.2f, 0.4f, 0.4f}))[0], 1);
  EXPECT_EQ(argmax_labels(point({0.25f, 0.25f, 0.25f, 0.25f}))[0], 0);
  EXPECT_EQ(argmax_labels(point({0.0f, 0.0f, 1.0f}))[0], 2);
}

TEST(Vote, Mode) {
  EXPECT_EQ(majority_vote(Fold({label(2), label(2), label(2), label(7), label(0)}))[0], 2);
  EXPECT_EQ(majority_vote(Fold({label(1), label(1), label(3), label(3)}))[0], 1);
  EXPECT_EQ(majority_vote(Fold({label(3), label(3), label(1), label(1)}))[0], 1);
  EXPECT_EQ(majority_vote(Fold({label(9), label(4), label(200)}))[0], 4);
}

TEST(Idempotence, CopiesOfOneVolume) {
  std::mt19937_64 rng(2);
  const Grid g = Grid::from_spacing({5, 5, 5}, Eigen::Vector3d::Ones());
  const auto p = random_probs(g, 3, rng);
  EXPECT_EQ(average_probabilities(Fold({p})).channel(1)[7], p.channel(1)[7]);
  const auto avg = average_probabilities(Fold({p, p, p}));
  for (int c = 0; c < 3; ++c) {
    for (std::int64_t v = 0; v < g.voxel_count(); ++v) EXPECT_NEAR(avg(v, c), p(v, c), 1e-7f);
  }
  const auto l = argmax_labels(p);
  EXPECT_EQ(majority_vote(Fold({l})), l);
  EXPECT_EQ(majority_vote(Fold({l, l, l, l, l})), l);
}

TEST(Paths, VoteOfArgmaxCanDifferFromArgmaxOfMean) {
  // Two folds lean weakly to class 1, one fold is confident in class 0.
  const std::vector<Fold::Member> probs{point({0.45f, 0.55f}), point({0.45f, 0.55f}), point({0.99f, 0.01f})};
  const auto averaged = argmax_labels(average_probabilities(Fold(probs)));
  std::vector<Fold::Member> labels;
  for (const auto& m : probs) labels.emplace_back(argmax_labels(std::get<0>(m)));
  const auto voted = majority_vote(Fold(labels));
  EXPECT_EQ(averaged[0], 0);
  EXPECT_EQ(voted[0], 1);
}

}  // namespace
}  // namespace nodemetry
