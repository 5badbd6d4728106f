#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nodemetry/connected_components.hpp"
#include "nodemetry/morphometry.hpp"
#include "nodemetry/volume.hpp"

namespace nodemetry {

inline constexpr double kSoftDiceEpsilon = 1e-5;
inline constexpr double kProbabilityClamp = 1e-7;
inline constexpr double kDefaultThresholdMm = 8.0;

/// 2|a & b| / (|a| + |b|); 1.0 when both masks are empty.
double dice(const MaskVolume& a, const MaskVolume& b);

/// Dice from raw counts, same empty convention.
inline double dice_from_counts(std::int64_t overlap, std::int64_t size_a, std::int64_t size_b) {
  if (size_a + size_b == 0) return 1.0;
  return 2.0 * double(overlap) / double(size_a + size_b);
}

namespace detail {

template <typename Scalar>
void check_probabilities(std::span<const Scalar> prob) {
  for (const Scalar p : prob) {
    if (!(p >= Scalar(0) && p <= Scalar(1))) {
      throw ValidationError("probability outside [0,1]: " + std::to_string(double(p)));
    }
  }
}

// Soft dice and BCE of one channel against the one-hot mask gt == target.
template <typename Scalar, typename Gt>
std::pair<double, double> channel_terms(std::span<const Scalar> prob, std::span<const Gt> gt,
                                        Gt target) {
  const auto n = static_cast<Eigen::Index>(prob.size());
  const Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> p(prob.data(), n);
  const Eigen::Map<const Eigen::Array<Gt, Eigen::Dynamic, 1>> labels(gt.data(), n);
  const Eigen::ArrayXd pd = p.template cast<double>();
  const Eigen::ArrayXd g = (labels == target).template cast<double>();

  const double soft = (2.0 * (pd * g).sum() + kSoftDiceEpsilon) / (pd.sum() + g.sum() + kSoftDiceEpsilon);
  const Eigen::ArrayXd pc = pd.max(kProbabilityClamp).min(1.0 - kProbabilityClamp);
  const double bce = -(g * pc.log() + (1.0 - g) * (1.0 - pc).log()).mean();
  return {soft, bce};
}

}  // namespace detail

/// (2 sum(p g) + eps) / (sum p + sum g + eps), eps = 1e-5.
template <typename Scalar>
double soft_dice(const Volume<Scalar>& prob, const MaskVolume& gt) {
  assert_same_grid(prob.grid(), gt.grid());
  detail::check_probabilities(prob.data());
  const MaskVolume binary = binarize(gt);
  return detail::channel_terms<Scalar, std::uint8_t>(prob.data(), binary.data(), 1).first;
}

struct LossTerms {
  double total = 0.0;
  double bce = 0.0;        // mean over classes
  double soft_dice = 0.0;  // mean over classes
};

/// Mean over classes of BCE(p_c, g_c) + (1 - soft_dice(p_c, g_c)), with
/// probabilities clamped to [1e-7, 1 - 1e-7] inside the logarithms.
template <typename Scalar>
LossTerms composite_loss_terms(const ProbabilityVolume<Scalar>& probs, const LabelVolume& gt) {
  assert_same_grid(probs.grid(), gt.grid());
  const int classes = probs.classes();
  for (const auto label : gt.data()) {
    if (label >= classes) {
      throw ValidationError("ground-truth label " + std::to_string(int(label)) +
                            " outside the " + std::to_string(classes) + " predicted classes");
    }
  }
  LossTerms terms;
  for (int c = 0; c < classes; ++c) {
    detail::check_probabilities(probs.channel(c));
    const auto [soft, bce] =
        detail::channel_terms<Scalar, std::uint8_t>(probs.channel(c), gt.data(), static_cast<std::uint8_t>(c));
    terms.bce += bce;
    terms.soft_dice += soft;
  }
  terms.bce /= classes;
  terms.soft_dice /= classes;
  terms.total = terms.bce + (1.0 - terms.soft_dice);
  return terms;
}

template <typename Scalar>
double composite_loss(const ProbabilityVolume<Scalar>& probs, const LabelVolume& gt) {
  return composite_loss_terms(probs, gt).total;
}

struct Stratification {
  std::vector<std::size_t> large;  // indices with sad_mm >= threshold
  std::vector<std::size_t> small;
};

Stratification stratify(std::span<const NodeMeasurement> measurements,
                        double threshold_mm = kDefaultThresholdMm);

enum class Stratum { kAll, kLarge, kSmall };
const char* stratum_name(Stratum stratum);

struct NodeResult {
  NodeMeasurement measurement;
  double dice = 0.0;
  bool detected = false;
  bool large = false;
  std::vector<std::int64_t> matched_predictions;
};

struct PatientReport {
  std::string patient_id;
  double dice_all = 1.0;
  std::optional<double> dice_large;
  std::optional<double> dice_small;
  std::vector<NodeResult> per_node;
  std::int64_t gt_node_count = 0;
  std::int64_t detected_count = 0;
  std::int64_t pred_component_count = 0;
  std::int64_t unmatched_pred_count = 0;

  std::optional<double> stratum_dice(Stratum stratum) const;
};

struct EvaluationOptions {
  double threshold_mm = kDefaultThresholdMm;
  Connectivity connectivity = Connectivity::k26;
  /// A predicted component matches a GT node when it overlaps it and the
  /// overlap covers at least this fraction of the predicted component.
  double match_min_overlap = 0.0;
};

PatientReport evaluate_patient(const MaskVolume& gt_ln, const MaskVolume& pred_ln,
                               const EvaluationOptions& options = {}, std::string patient_id = {});

struct StratumSummary {
  std::optional<double> mean;
  std::optional<double> std;  // population std, absent when n < 2
  std::int64_t n = 0;
};

struct CohortReport {
  std::int64_t n_patients = 0;
  StratumSummary all, large, small;
  /// Mean/std of per-node dice pooled over every patient's nodes.
  StratumSummary node_all, node_large, node_small;
  /// Sorted by patient id.
  std::vector<PatientReport> patients;

  const StratumSummary& patient_stratum(Stratum stratum) const;
  const StratumSummary& node_stratum(Stratum stratum) const;
};

/// Population mean/std of `values` (order-independent).
StratumSummary summarize(std::vector<double> values);

CohortReport aggregate(std::vector<PatientReport> reports);

}  // namespace nodemetry
