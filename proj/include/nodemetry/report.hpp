#pragma once

#include <json.hpp>
#include <span>
#include <string>

#include "nodemetry/metrics.hpp"
#include "nodemetry/morphometry.hpp"

namespace nodemetry {

inline constexpr int kReportSchema = 1;

/// Rounds to 4 decimals, the precision of every serialized float.
double round4(double value);

/// {"schema": 1, "config": ..., "cohort": ..., "patients": [...]}, fields in
/// fixed order; absent strata serialize as null.
nlohmann::ordered_json report_json(const CohortReport& cohort, const nlohmann::ordered_json& config);
nlohmann::ordered_json patient_json(const PatientReport& patient);

/// One row per patient per stratum (patient_id,stratum,dice,node_count).
std::string report_csv(const CohortReport& cohort);

std::string measurements_csv(std::span<const NodeMeasurement> measurements);

/// Console summary with Table-style percentages, e.g. "54.8 +- 23.8".
std::string report_summary(const CohortReport& cohort);

}  // namespace nodemetry
