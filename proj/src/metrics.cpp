#include "nodemetry/metrics.hpp"

#include <map>
#include <numeric>

namespace nodemetry {

double dice(const MaskVolume& a, const MaskVolume& b) {
  assert_same_grid(a.grid(), b.grid());
  const auto da = a.data();
  const auto db = b.data();
  std::int64_t overlap = 0, size_a = 0, size_b = 0;
  for (std::size_t v = 0; v < da.size(); ++v) {
    const bool in_a = da[v] != 0;
    const bool in_b = db[v] != 0;
    size_a += in_a;
    size_b += in_b;
    overlap += in_a && in_b;
  }
  return dice_from_counts(overlap, size_a, size_b);
}

Stratification stratify(std::span<const NodeMeasurement> measurements, double threshold_mm) {
  if (!(threshold_mm > 0.0)) throw ValidationError("SAD threshold must be positive");
  Stratification out;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    (measurements[i].sad_mm >= threshold_mm ? out.large : out.small).push_back(i);
  }
  return out;
}

const char* stratum_name(Stratum stratum) {
  switch (stratum) {
    case Stratum::kAll:
      return "all";
    case Stratum::kLarge:
      return "large";
    case Stratum::kSmall:
      return "small";
  }
  return "all";
}

std::optional<double> PatientReport::stratum_dice(Stratum stratum) const {
  switch (stratum) {
    case Stratum::kAll:
      return dice_all;
    case Stratum::kLarge:
      return dice_large;
    case Stratum::kSmall:
      return dice_small;
  }
  return std::nullopt;
}

namespace {

// Counts of one stratum: GT voxels, matched-prediction voxels, overlap.
struct StratumCounts {
  std::int64_t gt = 0;
  std::int64_t pred = 0;
  std::int64_t overlap = 0;
  bool present = false;
};

PatientReport evaluate_canonical(const MaskVolume& gt_ln, const MaskVolume& pred_ln,
                                 const EvaluationOptions& options, std::string patient_id) {
  if (!(options.match_min_overlap >= 0.0 && options.match_min_overlap <= 1.0)) {
    throw ValidationError("match_min_overlap must lie in [0, 1]");
  }
  PatientReport report;
  report.patient_id = std::move(patient_id);
  report.dice_all = dice(gt_ln, pred_ln);

  const ComponentSet pred = label_components(pred_ln, options.connectivity);
  const ComponentSet gt = label_components(gt_ln, options.connectivity);
  report.gt_node_count = gt.count();
  report.pred_component_count = pred.count();

  // overlaps[p] = (gt id -> shared voxel count) for predicted component p,
  // from a merge of the two raster-ordered run lists.
  std::vector<std::map<std::int64_t, std::int64_t>> overlaps(static_cast<std::size_t>(pred.count()) + 1);
  {
    const auto pr = pred.runs(), gr = gt.runs();
    std::size_t a = 0, b = 0;
    while (a < pr.size() && b < gr.size()) {
      const std::int64_t lo = std::max(pr[a].start, gr[b].start);
      const std::int64_t pe = pr[a].start + pr[a].length, ge = gr[b].start + gr[b].length;
      if (lo < std::min(pe, ge)) overlaps[pr[a].id][gr[b].id] += std::min(pe, ge) - lo;
      if (pe < ge) {
        ++a;
      } else {
        ++b;
      }
    }
  }

  report.per_node.resize(static_cast<std::size_t>(gt.count()));
  for (std::int64_t g = 1; g <= gt.count(); ++g) {
    NodeResult& node = report.per_node[static_cast<std::size_t>(g - 1)];
    node.measurement = measure_node(gt.voxels(g), gt.grid(), g);
    node.large = node.measurement.sad_mm >= options.threshold_mm;
  }

  std::vector<bool> matched_any(static_cast<std::size_t>(pred.count()) + 1, false);
  std::vector<std::int64_t> node_pred(static_cast<std::size_t>(gt.count()) + 1, 0);
  std::vector<std::int64_t> node_overlap(static_cast<std::size_t>(gt.count()) + 1, 0);
  std::vector<std::int64_t> node_touch(static_cast<std::size_t>(gt.count()) + 1, 0);
  // Per stratum: which predicted components count toward its union.
  std::vector<bool> in_large(static_cast<std::size_t>(pred.count()) + 1, false);
  std::vector<bool> in_small(static_cast<std::size_t>(pred.count()) + 1, false);

  for (std::int64_t p = 1; p <= pred.count(); ++p) {
    const std::int64_t p_size = pred.size(p);
    for (const auto& [g, shared] : overlaps[static_cast<std::size_t>(p)]) {
      node_touch[static_cast<std::size_t>(g)] += shared;
      if (double(shared) < options.match_min_overlap * double(p_size)) continue;
      matched_any[static_cast<std::size_t>(p)] = true;
      node_pred[static_cast<std::size_t>(g)] += p_size;
      node_overlap[static_cast<std::size_t>(g)] += shared;
      NodeResult& node = report.per_node[static_cast<std::size_t>(g - 1)];
      node.matched_predictions.push_back(p);
      (node.large ? in_large : in_small)[static_cast<std::size_t>(p)] = true;
    }
  }

  StratumCounts large, small;
  for (std::int64_t g = 1; g <= gt.count(); ++g) {
    NodeResult& node = report.per_node[static_cast<std::size_t>(g - 1)];
    const auto gi = static_cast<std::size_t>(g);
    node.dice = dice_from_counts(node_overlap[gi], gt.size(g), node_pred[gi]);
    node.detected = node_touch[gi] > 0;
    report.detected_count += node.detected;
    StratumCounts& s = node.large ? large : small;
    s.present = true;
    s.gt += gt.size(g);
  }
  for (std::int64_t p = 1; p <= pred.count(); ++p) {
    const auto pi = static_cast<std::size_t>(p);
    if (!matched_any[pi]) ++report.unmatched_pred_count;
    // |G_S & U_S|: every voxel p shares with a node of S, once p is in U_S.
    for (const auto& [g, shared] : overlaps[pi]) {
      const bool node_large = report.per_node[static_cast<std::size_t>(g - 1)].large;
      if (node_large ? in_large[pi] : in_small[pi]) (node_large ? large : small).overlap += shared;
    }
    if (in_large[pi]) large.pred += pred.size(p);
    if (in_small[pi]) small.pred += pred.size(p);
  }
  if (large.present) report.dice_large = dice_from_counts(large.overlap, large.gt, large.pred);
  if (small.present) report.dice_small = dice_from_counts(small.overlap, small.gt, small.pred);
  return report;
}

}  // namespace

PatientReport evaluate_patient(const MaskVolume& gt_ln, const MaskVolume& pred_ln,
                               const EvaluationOptions& options, std::string patient_id) {
  assert_same_grid(gt_ln.grid(), pred_ln.grid());
  if (canonical_orientation(gt_ln.grid()).is_identity()) {
    return evaluate_canonical(gt_ln, pred_ln, options, std::move(patient_id));
  }
  return evaluate_canonical(canonicalize(gt_ln), canonicalize(pred_ln), options, std::move(patient_id));
}

StratumSummary summarize(std::vector<double> values) {
  StratumSummary s;
  s.n = std::ssize(values);
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(values.size());
  s.mean = mean;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    s.std = std::sqrt(ss / double(values.size()));
  }
  return s;
}

const StratumSummary& CohortReport::patient_stratum(Stratum stratum) const {
  switch (stratum) {
    case Stratum::kLarge:
      return large;
    case Stratum::kSmall:
      return small;
    case Stratum::kAll:
      break;
  }
  return all;
}

const StratumSummary& CohortReport::node_stratum(Stratum stratum) const {
  switch (stratum) {
    case Stratum::kLarge:
      return node_large;
    case Stratum::kSmall:
      return node_small;
    case Stratum::kAll:
      break;
  }
  return node_all;
}

CohortReport aggregate(std::vector<PatientReport> reports) {
  if (reports.empty()) throw ValidationError("cannot aggregate an empty list of patient reports");
  std::stable_sort(reports.begin(), reports.end(),
                   [](const PatientReport& a, const PatientReport& b) { return a.patient_id < b.patient_id; });
  std::vector<double> all, large, small, node_all, node_large, node_small;
  for (const auto& r : reports) {
    all.push_back(r.dice_all);
    if (r.dice_large) large.push_back(*r.dice_large);
    if (r.dice_small) small.push_back(*r.dice_small);
    for (const auto& node : r.per_node) {
      node_all.push_back(node.dice);
      (node.large ? node_large : node_small).push_back(node.dice);
    }
  }
  CohortReport cohort;
  cohort.n_patients = std::ssize(reports);
  cohort.all = summarize(std::move(all));
  cohort.large = summarize(std::move(large));
  cohort.small = summarize(std::move(small));
  cohort.node_all = summarize(std::move(node_all));
  cohort.node_large = summarize(std::move(node_large));
  cohort.node_small = summarize(std::move(node_small));
  cohort.patients = std::move(reports);
  return cohort;
}

}  // namespace nodemetry
