#include "ips/wire.hpp"

#include "ips/error.hpp"
#include "ips/jsonl.hpp"

namespace ips {

Observation observation_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::MalformedRecord, "observation must be an object");
  for (const auto& item : j.items()) {
    if (item.key() != "t" && item.key() != "heading_deg" && item.key() != "readings") {
      throw Error(ErrorCode::MalformedRecord, "unknown observation key \"" + item.key() + "\"");
    }
  }
  Observation obs;
  if (j.contains("t")) {
    if (!j.at("t").is_string()) throw Error(ErrorCode::MalformedRecord, "\"t\" must be a string");
    obs.timestamp = Timestamp::parse(j.at("t").get<std::string>());
  }
  if (j.contains("heading_deg") && !j.at("heading_deg").is_null()) {
    if (!j.at("heading_deg").is_number_integer()) throw Error(ErrorCode::MalformedRecord, "\"heading_deg\" must be an integer");
    try {
      obs.heading_hint = heading_from_degrees(j.at("heading_deg").get<int>());
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, e.detail());
    }
  }
  if (!j.contains("readings") || !j.at("readings").is_array()) {
    throw Error(ErrorCode::MalformedRecord, "observation needs a \"readings\" array");
  }
  for (const auto& r : j.at("readings")) obs.readings.push_back(reading_from_json(r));
  validate_observation(obs);
  return obs;
}

nlohmann::ordered_json observation_to_json(const Observation& obs) {
  nlohmann::ordered_json j;
  j["t"] = obs.timestamp.str();
  if (obs.heading_hint) j["heading_deg"] = heading_degrees(*obs.heading_hint);
  auto readings = nlohmann::ordered_json::array();
  for (const auto& r : obs.readings) readings.push_back(reading_to_json(r));
  j["readings"] = std::move(readings);
  return j;
}

nlohmann::ordered_json estimate_to_json(const PositionEstimate& est) {
  nlohmann::ordered_json j;
  j["x"] = est.x;
  j["y"] = est.y;
  j["heading_deg"] = heading_degrees(est.heading_est);
  j["log_likelihood"] = est.log_likelihood;
  j["matched_aps"] = est.matched_ap_count;
  auto cells = nlohmann::ordered_json::array();
  for (const auto& c : est.top_cells) {
    cells.push_back({{"cell", c.cell}, {"heading_deg", heading_degrees(c.heading)}, {"log_likelihood", c.log_likelihood}});
  }
  j["top_cells"] = std::move(cells);
  return j;
}

nlohmann::ordered_json accuracy_record_to_json(const AccuracyRecord& rec) {
  nlohmann::ordered_json j;
  j["ground_truth"] = {{"x", rec.ground_truth.x}, {"y", rec.ground_truth.y}};
  j["estimate"] = estimate_to_json(rec.estimate);
  j["error_m"] = rec.error_m;
  return j;
}

TruthObservation truth_observation_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("observation") || !j.contains("truth")) {
    throw Error(ErrorCode::MalformedRecord, "expected {\"observation\", \"truth\"}");
  }
  const auto& t = j.at("truth");
  if (!t.is_object() || !t.contains("x") || !t.contains("y") || !t.at("x").is_number() || !t.at("y").is_number()) {
    throw Error(ErrorCode::MalformedRecord, "truth needs numeric x and y");
  }
  return {observation_from_json(j.at("observation")), {t.at("x").get<double>(), t.at("y").get<double>()}};
}

nlohmann::ordered_json truth_observation_to_json(const TruthObservation& item) {
  nlohmann::ordered_json j;
  j["observation"] = observation_to_json(item.observation);
  j["truth"] = {{"x", item.truth.x}, {"y", item.truth.y}};
  return j;
}

nlohmann::ordered_json summary_to_json(const AccuracySummary& summary) {
  nlohmann::ordered_json j;
  j["mean_error_m"] = summary.mean_error_m;
  j["std_error_m"] = summary.std_error_m;
  j["n"] = summary.n;
  j["skipped"] = summary.skipped;
  j["single_record"] = summary.single_record;
  return j;
}

}  // namespace ips
