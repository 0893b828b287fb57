#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ips/fingerprint.hpp"

namespace ips {

// Survey sample records, one JSON object per line:
// {"point_id":..,"x":..,"y":..,"heading_deg":..,"t":..,"device_id":..,"readings":[{"bssid","band","ssid"?,"rssi"}]}

nlohmann::ordered_json sample_to_json(const FingerprintSample& sample);
/// Strict: every key required (except reading "ssid"), unknown keys rejected.
/// Throws MalformedRecord.
FingerprintSample sample_from_json(const nlohmann::json& j);

std::string sample_to_line(const FingerprintSample& sample);

/// Returns the number of bytes written.
std::size_t write_jsonl(std::span<const FingerprintSample> samples, std::ostream& sink);

/// Throws MalformedRecord naming the 1-based line; nothing is returned on failure.
std::vector<FingerprintSample> read_jsonl(std::istream& source);

std::vector<FingerprintSample> read_jsonl_file(const std::string& path);
void write_jsonl_file(std::span<const FingerprintSample> samples, const std::string& path);

nlohmann::ordered_json reading_to_json(const Reading& reading);
Reading reading_from_json(const nlohmann::json& j);

nlohmann::ordered_json ap_to_json(const AccessPointId& ap);
AccessPointId ap_from_json(const nlohmann::json& j);

nlohmann::ordered_json area_to_json(const SurveyArea& area);
/// reference_points is optional. Throws InvalidArea.
SurveyArea area_from_json(const nlohmann::json& j);

/// Reads a whole file into a string. Throws Io.
std::string read_text_file(const std::string& path);
/// Writes via a temporary sibling and rename. Throws Io.
void write_text_file_atomic(const std::string& path, const std::string& content);

}  // namespace ips
