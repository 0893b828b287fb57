#include "ips/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ips/error.hpp"
#include "ips/jsonl.hpp"

namespace ips {

const ReferencePoint* SparseRadioMap::find_reference_point(const std::string& point_id) const {
  for (const auto& rp : area.reference_points) {
    if (rp.point_id == point_id) return &rp;
  }
  return nullptr;
}

namespace {

const ReferencePoint& match_reference_point(const FingerprintSample& s, const SurveyArea& area) {
  const ReferencePoint* match = nullptr;
  for (const auto& rp : area.reference_points) {
    if (std::hypot(rp.x - s.x, rp.y - s.y) > kReferencePointToleranceM) continue;
    if (rp.point_id == s.point_id) return rp;
    if (match == nullptr) match = &rp;
  }
  if (match == nullptr) {
    throw Error(ErrorCode::UnknownReferencePoint, "sample '" + s.point_id + "' at (" + std::to_string(s.x) + ", " +
                                                      std::to_string(s.y) + ") matches no reference point");
  }
  return *match;
}

struct GroupKey {
  std::string point_id;
  Heading heading;
  friend auto operator<=>(const GroupKey& a, const GroupKey& b) {
    return std::tie(a.point_id, a.heading) <=> std::tie(b.point_id, b.heading);
  }
};

CellDistribution fit_cell(std::vector<int>& values) {
  // sort so the summation order, and hence the result, is independent of input order
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (int v : values) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (int v : values) ss += (v - mean) * (v - mean);
  const double sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, std::max(kSigmaFloorDb, sd), static_cast<int>(values.size())};
}

}  // namespace

SparseRadioMap fit_distributions(std::span<const FingerprintSample> samples, const SurveyArea& area,
                                 double min_presence) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no samples to fit");
  if (!(min_presence >= 0.0 && min_presence <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_presence must lie in [0, 1]");
  }

  struct Group {
    int scans = 0;
    std::map<AccessPointId, std::vector<int>> heard;
  };
  std::map<GroupKey, Group> groups;
  for (const auto& s : samples) {
    const ReferencePoint& rp = match_reference_point(s, area);
    Group& g = groups[{rp.point_id, s.heading}];
    ++g.scans;
    for (const auto& r : s.readings) g.heard[r.ap].push_back(r.rssi_dbm);
  }

  SparseRadioMap map;
  map.area = area;
  std::set<AccessPointId> aps;
  for (auto& [key, group] : groups) {
    for (auto& [ap, values] : group.heard) {
      const double presence = static_cast<double>(values.size()) / group.scans;
      if (presence < min_presence) continue;
      map.cells.emplace(CellKey{key.point_id, key.heading, ap}, fit_cell(values));
      aps.insert(ap);
    }
  }
  // keep the first-seen SSID for display
  for (const auto& s : samples) {
    for (const auto& r : s.readings) {
      auto it = aps.find(r.ap);
      if (it != aps.end() && !it->ssid && r.ap.ssid) {
        aps.erase(it);
        aps.insert(r.ap);
      }
    }
  }
  map.ap_index.assign(aps.begin(), aps.end());
  return map;
}

std::map<CoverageKey, int> coverage_report(const SparseRadioMap& map) {
  std::map<CoverageKey, int> counts;
  for (Heading h : kAllHeadings) {
    for (const auto& ap : map.ap_index) counts[{h, ap}] = 0;
  }
  for (const auto& [key, cell] : map.cells) ++counts[{key.heading, key.ap}];
  return counts;
}

nlohmann::ordered_json sparse_map_to_json(const SparseRadioMap& map) {
  nlohmann::ordered_json j;
  j["area"] = area_to_json(map.area);
  auto aps = nlohmann::ordered_json::array();
  for (const auto& ap : map.ap_index) aps.push_back(ap_to_json(ap));
  j["ap_index"] = std::move(aps);
  auto cells = nlohmann::ordered_json::array();
  for (const auto& [key, cell] : map.cells) {
    nlohmann::ordered_json c;
    c["point_id"] = key.point_id;
    c["heading_deg"] = heading_degrees(key.heading);
    c["bssid"] = key.ap.bssid.str();
    c["band"] = band_label(key.ap.band);
    c["mean_dbm"] = cell.mean_dbm;
    c["std_dbm"] = cell.std_dbm;
    c["sample_count"] = cell.sample_count;
    cells.push_back(std::move(c));
  }
  j["cells"] = std::move(cells);
  return j;
}

SparseRadioMap sparse_map_from_json(const nlohmann::json& j) {
  SparseRadioMap map;
  try {
    map.area = area_from_json(j.at("area"));
    for (const auto& a : j.at("ap_index")) map.ap_index.push_back(ap_from_json(a));
    for (const auto& c : j.at("cells")) {
      AccessPointId ap;
      ap.bssid = Bssid::parse(c.at("bssid").get<std::string>());
      ap.band = parse_band(c.at("band").get<std::string>());
      CellKey key{c.at("point_id").get<std::string>(), heading_from_degrees(c.at("heading_deg").get<int>()), ap};
      map.cells.emplace(std::move(key), CellDistribution{c.at("mean_dbm").get<double>(), c.at("std_dbm").get<double>(),
                                                         c.at("sample_count").get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("sparse map: ") + e.what());
  }
  return map;
}

}  // namespace ips
