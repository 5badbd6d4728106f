#include "nodemetry/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace nodemetry {

using nlohmann::ordered_json;

double round4(double value) { return std::round(value * 1e4) / 1e4; }

namespace {

ordered_json optional_number(const std::optional<double>& value) {
  return value ? ordered_json(round4(*value)) : ordered_json(nullptr);
}

ordered_json stratum_json(const StratumSummary& s) {
  ordered_json j;
  j["mean"] = optional_number(s.mean);
  j["std"] = optional_number(s.std);
  j["n"] = s.n;
  return j;
}

constexpr Stratum kStrata[] = {Stratum::kAll, Stratum::kLarge, Stratum::kSmall};

}  // namespace

ordered_json patient_json(const PatientReport& p) {
  ordered_json j;
  j["patient_id"] = p.patient_id;
  j["dice_all"] = round4(p.dice_all);
  j["dice_large"] = optional_number(p.dice_large);
  j["dice_small"] = optional_number(p.dice_small);
  j["gt_node_count"] = p.gt_node_count;
  j["detected_count"] = p.detected_count;
  j["pred_component_count"] = p.pred_component_count;
  j["unmatched_pred_count"] = p.unmatched_pred_count;
  ordered_json nodes = ordered_json::array();
  for (const auto& node : p.per_node) {
    ordered_json n;
    n["component_index"] = node.measurement.component_index;
    n["voxel_count"] = node.measurement.voxel_count;
    n["volume_mm3"] = round4(node.measurement.volume_mm3);
    n["sad_mm"] = round4(node.measurement.sad_mm);
    n["sad_slice_index"] = node.measurement.sad_slice_index;
    n["long_axis_mm"] = round4(node.measurement.long_axis_mm);
    n["stratum"] = node.large ? "large" : "small";
    n["dice"] = round4(node.dice);
    n["detected"] = node.detected;
    n["matched_predictions"] = node.matched_predictions;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j;
}

ordered_json report_json(const CohortReport& cohort, const ordered_json& config) {
  ordered_json j;
  j["schema"] = kReportSchema;
  j["config"] = config;
  ordered_json c;
  c["n_patients"] = cohort.n_patients;
  c["both_empty_dice"] = 1.0;
  c["std_convention"] = "population";
  ordered_json by_patient, by_node;
  for (const Stratum s : kStrata) {
    by_patient[stratum_name(s)] = stratum_json(cohort.patient_stratum(s));
    by_node[stratum_name(s)] = stratum_json(cohort.node_stratum(s));
  }
  c["patient_averaged"] = std::move(by_patient);
  c["node_averaged"] = std::move(by_node);
  j["cohort"] = std::move(c);
  ordered_json patients = ordered_json::array();
  for (const auto& p : cohort.patients) patients.push_back(patient_json(p));
  j["patients"] = std::move(patients);
  return j;
}

std::string report_csv(const CohortReport& cohort) {
  std::ostringstream out;
  out << "patient_id,stratum,dice,node_count\n" << std::fixed << std::setprecision(4);
  for (const auto& p : cohort.patients) {
    std::int64_t large = 0;
    for (const auto& node : p.per_node) large += node.large;
    const std::int64_t counts[] = {p.gt_node_count, large, p.gt_node_count - large};
    for (const Stratum s : kStrata) {
      const auto value = p.stratum_dice(s);
      if (!value) continue;
      out << p.patient_id << ',' << stratum_name(s) << ',' << round4(*value) << ','
          << counts[static_cast<int>(s)] << '\n';
    }
  }
  return out.str();
}

std::string measurements_csv(std::span<const NodeMeasurement> measurements) {
  std::ostringstream out;
  out << "component_index,voxel_count,volume_mm3,sad_mm,sad_slice_index,long_axis_mm\n"
      << std::fixed << std::setprecision(4);
  for (const auto& m : measurements) {
    out << m.component_index << ',' << m.voxel_count << ',' << round4(m.volume_mm3) << ','
        << round4(m.sad_mm) << ',' << m.sad_slice_index << ',' << round4(m.long_axis_mm) << '\n';
  }
  return out.str();
}

std::string report_summary(const CohortReport& cohort) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "patients: " << cohort.n_patients << '\n';
  const char* labels[] = {"Dice (All LN)", "Dice (LN >= threshold)", "Dice (LN < threshold)"};
  for (const Stratum s : kStrata) {
    const auto& summary = cohort.patient_stratum(s);
    out << labels[static_cast<int>(s)] << ": ";
    if (!summary.mean) {
      out << "n/a";
    } else {
      out << 100.0 * *summary.mean;
      if (summary.std) out << " +- " << 100.0 * *summary.std;
    }
    out << "  (n = " << summary.n << ")\n";
  }
  return out.str();
}

}  // namespace nodemetry
