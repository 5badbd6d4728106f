#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <variant>
#include <vector>

#include "nodemetry/volume.hpp"

namespace nodemetry {

enum class FoldKind { kProbability, kLabel };

/// Predictions of the cross-validation folds for one case. All members share
/// a grid and a kind.
template <typename Scalar = float>
class FoldSet {
 public:
  using Member = std::variant<ProbabilityVolume<Scalar>, LabelVolume>;

  explicit FoldSet(std::vector<Member> members) : members_(std::move(members)) {
    if (members_.empty()) throw ValidationError("fold set needs at least one member");
    kind_ = kind_of(members_.front());
    const Grid& first = grid_of(members_.front());
    for (const auto& m : members_) {
      if (kind_of(m) != kind_) throw ValidationError("fold set mixes probability and label predictions");
      assert_same_grid(first, grid_of(m));
    }
    if (kind_ == FoldKind::kProbability) {
      const int classes = std::get<0>(members_.front()).classes();
      for (const auto& m : members_) {
        if (std::get<0>(m).classes() != classes) throw ValidationError("folds disagree on class count");
      }
    }
  }

  FoldKind kind() const { return kind_; }
  std::size_t size() const { return members_.size(); }
  const Member& operator[](std::size_t i) const { return members_[i]; }
  const Grid& grid() const { return grid_of(members_.front()); }

  const ProbabilityVolume<Scalar>& probability(std::size_t i) const { return std::get<0>(members_[i]); }
  const LabelVolume& labels(std::size_t i) const { return std::get<1>(members_[i]); }

 private:
  static FoldKind kind_of(const Member& m) {
    return m.index() == 0 ? FoldKind::kProbability : FoldKind::kLabel;
  }
  static const Grid& grid_of(const Member& m) {
    return std::visit([](const auto& v) -> const Grid& { return v.grid(); }, m);
  }

  std::vector<Member> members_;
  FoldKind kind_ = FoldKind::kProbability;
};

/// Per-voxel, per-class mean over folds. Values are summed in sorted order,
/// so the result does not depend on fold order.
template <typename Scalar>
ProbabilityVolume<Scalar> average_probabilities(const FoldSet<Scalar>& folds) {
  if (folds.kind() != FoldKind::kProbability) {
    throw ValidationError("average_probabilities needs probability folds");
  }
  const auto& first = folds.probability(0);
  ProbabilityVolume<Scalar> out(first.grid(), first.classes());
  const std::size_t k = folds.size();
  std::vector<double> values(k);
  for (int c = 0; c < first.classes(); ++c) {
    std::vector<std::span<const Scalar>> planes;
    planes.reserve(k);
    for (std::size_t f = 0; f < k; ++f) planes.push_back(folds.probability(f).channel(c));
    auto dst = out.channel(c);
    for (std::size_t v = 0; v < dst.size(); ++v) {
      for (std::size_t f = 0; f < k; ++f) values[f] = double(planes[f][v]);
      std::sort(values.begin(), values.end());
      double sum = 0.0;
      for (const double x : values) sum += x;
      dst[v] = static_cast<Scalar>(sum / double(k));
    }
  }
  return out;
}

/// Class of maximal probability; ties go to the smallest class id.
template <typename Scalar>
LabelVolume argmax_labels(const ProbabilityVolume<Scalar>& probs) {
  if (probs.classes() > 256) throw CapacityError("more than 256 classes cannot be stored as labels");
  LabelVolume out(probs.grid());
  auto dst = out.data();
  std::vector<std::span<const Scalar>> planes;
  for (int c = 0; c < probs.classes(); ++c) planes.push_back(probs.channel(c));
  for (std::size_t v = 0; v < dst.size(); ++v) {
    int best = 0;
    Scalar best_value = planes[0][v];
    for (int c = 1; c < probs.classes(); ++c) {
      if (planes[static_cast<std::size_t>(c)][v] > best_value) {
        best_value = planes[static_cast<std::size_t>(c)][v];
        best = c;
      }
    }
    dst[v] = static_cast<std::uint8_t>(best);
  }
  return out;
}

/// Per-voxel modal label; ties go to the smallest class id.
template <typename Scalar>
LabelVolume majority_vote(const FoldSet<Scalar>& folds) {
  if (folds.kind() != FoldKind::kLabel) throw ValidationError("majority_vote needs label folds");
  LabelVolume out(folds.grid());
  auto dst = out.data();
  std::vector<std::span<const std::uint8_t>> members;
  for (std::size_t f = 0; f < folds.size(); ++f) members.push_back(folds.labels(f).data());
  std::array<std::uint32_t, 256> votes{};
  for (std::size_t v = 0; v < dst.size(); ++v) {
    for (const auto& m : members) ++votes[m[v]];
    std::uint8_t best = 0;
    std::uint32_t best_votes = 0;
    for (const auto& m : members) {
      const std::uint8_t label = m[v];
      if (votes[label] > best_votes || (votes[label] == best_votes && label < best)) {
        best = label;
        best_votes = votes[label];
      }
    }
    for (const auto& m : members) votes[m[v]] = 0;
    dst[v] = best;
  }
  return out;
}

}  // namespace nodemetry
