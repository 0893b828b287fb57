#include "ips/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "ips/error.hpp"
#include "ips/jsonl.hpp"

namespace ips {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Fixed origin for simulated timestamps.
constexpr std::int64_t kSimEpoch = 1714533669;  // 2024-05-01T03:21:09Z

}  // namespace

SimRng SimRng::derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return SimRng(splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index));
}

PathLossParams default_path_loss(Band band) {
  PathLossParams p;
  if (band == Band::Band5GHz) {
    p.ref_loss_db = 46.0;
    p.exponent = 2.8;
  }
  return p;
}

void validate_path_loss(const PathLossParams& p) {
  if (!(p.exponent > 0.0) || !(p.shadowing_std_db >= 0.0) || !(p.body_attenuation_db >= 0.0) ||
      !std::isfinite(p.tx_power_dbm) || !std::isfinite(p.ref_loss_db)) {
    throw Error(ErrorCode::InvalidArgument, "path loss needs exponent > 0, shadowing_std >= 0, body_attenuation >= 0");
  }
}

void validate_scenario(const SimScenario& scenario) {
  validate_area(scenario.area);
  if (scenario.aps.empty()) throw Error(ErrorCode::InvalidArgument, "scenario has no access points");
  std::set<AccessPointId> ids;
  for (const auto& ap : scenario.aps) {
    validate_path_loss(ap.params);
    if (!scenario.area.contains(ap.position.x, ap.position.y)) {
      throw Error(ErrorCode::InvalidArgument, "access point " + ap.id.str() + " lies outside the area");
    }
    if (!ids.insert(ap.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate access point " + ap.id.str());
  }
}

double mean_rssi(const VirtualAp& ap, const Point2& position) noexcept {
  const double d = std::hypot(ap.position.x - position.x, ap.position.y - position.y);
  const auto& p = ap.params;
  return p.tx_power_dbm - p.ref_loss_db -
         10.0 * p.exponent * std::log10(std::max(d, kReferenceDistanceM) / kReferenceDistanceM);
}

bool body_blocks(const Point2& position, Heading heading, const Point2& ap) noexcept {
  const double theta = heading_degrees(heading) * std::numbers::pi / 180.0;
  // facing direction, clockwise from north with y pointing north
  const double fx = std::sin(theta);
  const double fy = std::cos(theta);
  const double bx = ap.x - position.x;
  const double by = ap.y - position.y;
  // cardinal unit vectors are inexact in floating point, so treat tiny dot products as perpendicular
  const double dot = fx * bx + fy * by;
  return dot < -1e-9 * std::hypot(bx, by);
}

Observation simulate_rssi(const SimScenario& scenario, const Point2& position, Heading heading, SimRng& rng,
                          Timestamp timestamp) {
  if (!std::isfinite(position.x) || !std::isfinite(position.y) || !scenario.area.contains(position.x, position.y)) {
    throw Error(ErrorCode::OutOfBounds,
                "position (" + std::to_string(position.x) + ", " + std::to_string(position.y) + ") outside the area");
  }
  Observation obs;
  obs.timestamp = timestamp;
  for (const auto& ap : scenario.aps) {
    double r = mean_rssi(ap, position);
    if (body_blocks(position, heading, ap.position)) r -= ap.params.body_attenuation_db;
    r += ap.params.shadowing_std_db * rng.normal();
    // drawn unconditionally so one AP's parameters never shift another AP's draws
    const double u = rng.uniform();
    if (scenario.dropout && r < kDropoutThresholdDbm && u < 0.5) continue;
    const int rounded = static_cast<int>(std::clamp(std::round(r), static_cast<double>(kRssiMin), static_cast<double>(kRssiMax)));
    obs.readings.push_back({ap.id, rounded});
  }
  return obs;
}

std::vector<FingerprintSample> simulate_survey(const SimScenario& scenario, std::span<const ReferencePoint> rps,
                                               int scans_per_cell) {
  if (scans_per_cell < 1) throw Error(ErrorCode::InvalidArgument, "scans_per_cell must be at least 1");
  std::vector<FingerprintSample> out;
  out.reserve(rps.size() * 4 * static_cast<std::size_t>(scans_per_cell));
  for (std::size_t i = 0; i < rps.size(); ++i) {
    const auto& rp = rps[i];
    SimRng rng = SimRng::derive(scenario.rng_seed, static_cast<std::uint64_t>(SimStream::Survey), i);
    for (Heading h : kAllHeadings) {
      for (int s = 0; s < scans_per_cell; ++s) {
        const auto t = Timestamp::from_unix(kSimEpoch + static_cast<std::int64_t>(out.size()));
        Observation obs = simulate_rssi(scenario, {rp.x, rp.y}, h, rng, t);
        // every AP can drop out of a single scan; such scans carry nothing to store
        if (obs.readings.empty()) continue;
        out.push_back({rp.point_id, rp.x, rp.y, h, t, "sim", std::move(obs.readings)});
      }
    }
  }
  return out;
}

Heading nearest_cardinal(double dx, double dy) noexcept {
  double deg = std::atan2(dx, dy) * 180.0 / std::numbers::pi;  // clockwise from north
  if (deg < 0.0) deg += 360.0;
  const long quadrant = std::lround(deg / 90.0) % 4;
  return kAllHeadings[static_cast<std::size_t>(quadrant)];
}

std::vector<WalkEmission> simulate_walk(const SimScenario& scenario, std::span<const Point2> waypoints, double speed,
                                        double scan_period) {
  if (waypoints.size() < 2) throw Error(ErrorCode::InvalidArgument, "walk needs at least two waypoints");
  if (!(speed > 0.0) || !(scan_period > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "speed and scan_period must be positive");
  }
  for (const auto& w : waypoints) {
    if (!scenario.area.contains(w.x, w.y)) throw Error(ErrorCode::OutOfBounds, "waypoint outside the area");
  }
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < waypoints.size(); ++i) {
    cumulative.push_back(cumulative.back() +
                         std::hypot(waypoints[i].x - waypoints[i - 1].x, waypoints[i].y - waypoints[i - 1].y));
  }
  const double total = cumulative.back();
  if (!(total > 0.0)) throw Error(ErrorCode::DegeneratePath, "walk has zero length");

  const double step = speed * scan_period;
  std::vector<double> stations;
  for (std::size_t k = 0;; ++k) {
    const double s = static_cast<double>(k) * step;
    if (s > total + 1e-9 * total) break;
    stations.push_back(std::min(s, total));
  }
  if (total - stations.back() > 1e-9 * total) stations.push_back(total);

  std::vector<WalkEmission> out;
  out.reserve(stations.size());
  std::size_t leg = 1;
  for (std::size_t k = 0; k < stations.size(); ++k) {
    const double s = stations[k];
    // advance to the leg containing s; a station on a vertex belongs to the outgoing leg
    while (leg + 1 < waypoints.size() && s >= cumulative[leg] - 1e-12) ++leg;
    // zero-length legs carry no direction, so look back for the last real one
    std::size_t dir_leg = leg;
    while (dir_leg > 1 && cumulative[dir_leg] == cumulative[dir_leg - 1]) --dir_leg;
    const Point2 a = waypoints[dir_leg - 1];
    const Point2 b = waypoints[dir_leg];
    const double leg_len = cumulative[leg] - cumulative[leg - 1];
    const double frac = leg_len > 0.0 ? std::clamp((s - cumulative[leg - 1]) / leg_len, 0.0, 1.0) : 1.0;
    const Point2 from = waypoints[leg - 1];
    const Point2 to = waypoints[leg];
    const Point2 pos{from.x + frac * (to.x - from.x), from.y + frac * (to.y - from.y)};
    const Heading heading = nearest_cardinal(b.x - a.x, b.y - a.y);
    SimRng rng = SimRng::derive(scenario.rng_seed, static_cast<std::uint64_t>(SimStream::Walk), k);
    const auto t = Timestamp::from_unix(kSimEpoch + static_cast<std::int64_t>(std::llround(k * scan_period)));
    out.push_back({simulate_rssi(scenario, pos, heading, rng, t), pos, heading});
  }
  return out;
}

nlohmann::ordered_json scenario_to_json(const SimScenario& scenario) {
  nlohmann::ordered_json j;
  j["area"] = area_to_json(scenario.area);
  auto aps = nlohmann::ordered_json::array();
  for (const auto& ap : scenario.aps) {
    nlohmann::ordered_json a;
    a["bssid"] = ap.id.bssid.str();
    a["band"] = band_label(ap.id.band);
    if (ap.id.ssid) a["ssid"] = *ap.id.ssid;
    a["x"] = ap.position.x;
    a["y"] = ap.position.y;
    a["tx_power"] = ap.params.tx_power_dbm;
    a["ref_loss"] = ap.params.ref_loss_db;
    a["exponent"] = ap.params.exponent;
    a["shadowing_std"] = ap.params.shadowing_std_db;
    a["body_attenuation"] = ap.params.body_attenuation_db;
    aps.push_back(std::move(a));
  }
  j["aps"] = std::move(aps);
  j["seed"] = scenario.rng_seed;
  j["dropout"] = scenario.dropout;
  return j;
}

SimScenario scenario_from_json(const nlohmann::json& j) {
  SimScenario sc;
  try {
    sc.area = area_from_json(j.at("area"));
    for (const auto& a : j.at("aps")) {
      VirtualAp ap;
      ap.id.bssid = Bssid::parse(a.at("bssid").get<std::string>());
      ap.id.band = parse_band(a.at("band").get<std::string>());
      if (a.contains("ssid")) ap.id.ssid = a.at("ssid").get<std::string>();
      ap.position = {a.at("x").get<double>(), a.at("y").get<double>()};
      ap.params = default_path_loss(ap.id.band);
      ap.params.tx_power_dbm = a.value("tx_power", ap.params.tx_power_dbm);
      ap.params.ref_loss_db = a.value("ref_loss", ap.params.ref_loss_db);
      ap.params.exponent = a.value("exponent", ap.params.exponent);
      ap.params.shadowing_std_db = a.value("shadowing_std", ap.params.shadowing_std_db);
      ap.params.body_attenuation_db = a.value("body_attenuation", ap.params.body_attenuation_db);
      sc.aps.push_back(std::move(ap));
    }
    sc.rng_seed = j.value("seed", std::uint64_t{0});
    sc.dropout = j.value("dropout", true);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("scenario: ") + e.what());
  }
  validate_scenario(sc);
  return sc;
}

SimScenario load_scenario(const std::string& path) {
  try {
    return scenario_from_json(nlohmann::json::parse(read_text_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

}  // namespace ips
