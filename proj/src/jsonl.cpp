#include "ips/jsonl.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>

#include "ips/error.hpp"

namespace ips {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedRecord, what); }

void require_object(const json& j, const char* what) {
  if (!j.is_object()) malformed(std::string(what) + " must be a JSON object");
}

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional = {}) {
  for (const char* key : required) {
    if (!j.contains(key)) malformed(std::string("missing key \"") + key + "\"");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : required) known = known || item.key() == key;
    for (const char* key : optional) known = known || item.key() == key;
    if (!known) malformed("unknown key \"" + item.key() + "\"");
  }
}

const std::string& get_string(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_string()) malformed(std::string("\"") + key + "\" must be a string");
  return v.get_ref<const std::string&>();
}

double get_number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) malformed(std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

long long get_integer(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number_integer()) malformed(std::string("\"") + key + "\" must be an integer");
  return v.get<long long>();
}

}  // namespace

ordered_json ap_to_json(const AccessPointId& ap) {
  ordered_json j;
  j["bssid"] = ap.bssid.str();
  j["band"] = band_label(ap.band);
  if (ap.ssid) j["ssid"] = *ap.ssid;
  return j;
}

AccessPointId ap_from_json(const json& j) {
  require_object(j, "access point");
  AccessPointId ap;
  try {
    ap.bssid = Bssid::parse(get_string(j, "bssid"));
  } catch (const Error& e) {
    malformed(e.what());
  }
  ap.band = parse_band(get_string(j, "band"));
  if (j.contains("ssid")) ap.ssid = get_string(j, "ssid");
  return ap;
}

ordered_json reading_to_json(const Reading& reading) {
  ordered_json j = ap_to_json(reading.ap);
  j["rssi"] = reading.rssi_dbm;
  return j;
}

Reading reading_from_json(const json& j) {
  require_object(j, "reading");
  require_keys(j, {"bssid", "band", "rssi"}, {"ssid"});
  Reading r;
  r.ap = ap_from_json(j);
  const long long rssi = get_integer(j, "rssi");
  if (rssi < kRssiMin || rssi > kRssiMax) malformed("\"rssi\" outside [-100, 0]: " + std::to_string(rssi));
  r.rssi_dbm = static_cast<int>(rssi);
  return r;
}

ordered_json sample_to_json(const FingerprintSample& s) {
  ordered_json j;
  j["point_id"] = s.point_id;
  j["x"] = s.x;
  j["y"] = s.y;
  j["heading_deg"] = heading_degrees(s.heading);
  j["t"] = s.timestamp.str();
  j["device_id"] = s.device_id;
  auto readings = ordered_json::array();
  for (const auto& r : s.readings) readings.push_back(reading_to_json(r));
  j["readings"] = std::move(readings);
  return j;
}

FingerprintSample sample_from_json(const json& j) {
  require_object(j, "record");
  require_keys(j, {"point_id", "x", "y", "heading_deg", "t", "device_id", "readings"});
  FingerprintSample s;
  s.point_id = get_string(j, "point_id");
  s.x = get_number(j, "x");
  s.y = get_number(j, "y");
  if (!std::isfinite(s.x) || !std::isfinite(s.y)) malformed("coordinates must be finite");
  try {
    s.heading = heading_from_degrees(static_cast<int>(get_integer(j, "heading_deg")));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MalformedRecord) throw;
    malformed(e.detail());
  }
  s.timestamp = Timestamp::parse(get_string(j, "t"));
  s.device_id = get_string(j, "device_id");
  const auto& readings = j.at("readings");
  if (!readings.is_array()) malformed("\"readings\" must be an array");
  if (readings.empty()) malformed("\"readings\" is empty");
  s.readings.reserve(readings.size());
  for (const auto& r : readings) {
    Reading reading = reading_from_json(r);
    for (const auto& prev : s.readings) {
      if (prev.ap == reading.ap) malformed("duplicate reading for " + reading.ap.str());
    }
    s.readings.push_back(std::move(reading));
  }
  return s;
}

std::string sample_to_line(const FingerprintSample& sample) { return sample_to_json(sample).dump() + "\n"; }

std::size_t write_jsonl(std::span<const FingerprintSample> samples, std::ostream& sink) {
  std::size_t bytes = 0;
  for (const auto& s : samples) {
    const std::string line = sample_to_line(s);
    sink.write(line.data(), static_cast<std::streamsize>(line.size()));
    bytes += line.size();
  }
  if (!sink) throw Error(ErrorCode::Io, "write to sample sink failed");
  return bytes;
}

std::vector<FingerprintSample> read_jsonl(std::istream& source) {
  std::vector<FingerprintSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      out.push_back(sample_from_json(j));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + e.detail());
    }
  }
  return out;
}

std::vector<FingerprintSample> read_jsonl_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return read_jsonl(in);
}

void write_jsonl_file(std::span<const FingerprintSample> samples, const std::string& path) {
  std::ostringstream buf;
  write_jsonl(samples, buf);
  write_text_file_atomic(path, buf.str());
}

ordered_json area_to_json(const SurveyArea& area) {
  ordered_json j;
  j["width"] = area.width;
  j["height"] = area.height;
  auto rps = ordered_json::array();
  for (const auto& rp : area.reference_points) {
    ordered_json p;
    p["point_id"] = rp.point_id;
    p["x"] = rp.x;
    p["y"] = rp.y;
    rps.push_back(std::move(p));
  }
  j["reference_points"] = std::move(rps);
  return j;
}

SurveyArea area_from_json(const json& j) {
  SurveyArea area;
  try {
    require_object(j, "area");
    require_keys(j, {"width", "height"}, {"reference_points"});
    area.width = get_number(j, "width");
    area.height = get_number(j, "height");
    if (j.contains("reference_points")) {
      const auto& rps = j.at("reference_points");
      if (!rps.is_array()) malformed("\"reference_points\" must be an array");
      for (const auto& p : rps) {
        require_object(p, "reference point");
        require_keys(p, {"point_id", "x", "y"});
        area.reference_points.push_back({get_string(p, "point_id"), get_number(p, "x"), get_number(p, "y")});
      }
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidArea, e.detail());
  }
  validate_area(area);
  return area;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename to " + path + " failed: " + ec.message());
}

}  // namespace ips
