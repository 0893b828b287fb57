#pragma once

#include <json.hpp>

#include "ips/localizer.hpp"

namespace ips {

// JSON shapes exchanged over the HTTP API and written by the CLI.

/// {"t"?, "heading_deg"?, "readings":[...]}; "t" defaults to the epoch when absent.
Observation observation_from_json(const nlohmann::json& j);
nlohmann::ordered_json observation_to_json(const Observation& obs);

nlohmann::ordered_json estimate_to_json(const PositionEstimate& est);

nlohmann::ordered_json accuracy_record_to_json(const AccuracyRecord& rec);

/// {"observation": {...}, "truth": {"x":..,"y":..}}
TruthObservation truth_observation_from_json(const nlohmann::json& j);
nlohmann::ordered_json truth_observation_to_json(const TruthObservation& item);

/// {"mean_error_m","std_error_m","n","skipped","single_record"}
nlohmann::ordered_json summary_to_json(const AccuracySummary& summary);

}  // namespace ips
