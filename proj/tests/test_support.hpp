#pragma once

#include <algorithm>
#include <cctype>
#include <random>
#include <string>
#include <vector>

#include "ips/fingerprint.hpp"

namespace test {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Field-for-field equality, including the display-only SSID.
inline bool same_sample(const ips::FingerprintSample& a, const ips::FingerprintSample& b) {
  if (a.point_id != b.point_id || a.x != b.x || a.y != b.y || a.heading != b.heading || a.timestamp != b.timestamp ||
      a.device_id != b.device_id || a.readings.size() != b.readings.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.readings.size(); ++i) {
    const auto& ra = a.readings[i];
    const auto& rb = b.readings[i];
    if (!(ra.ap == rb.ap) || ra.ap.ssid != rb.ap.ssid || ra.rssi_dbm != rb.rssi_dbm) return false;
  }
  return true;
}

/// Valid samples with full-precision coordinates inside a 14 x 14 area.
inline std::vector<ips::FingerprintSample> random_samples(std::mt19937_64& rng, std::size_t count) {
  std::uniform_real_distribution<double> coord(0.0, 14.0);
  std::uniform_int_distribution<int> rssi(ips::kRssiMin, ips::kRssiMax);
  std::uniform_int_distribution<int> n_readings(1, 8);
  std::uniform_int_distribution<std::int64_t> t(0, 4'000'000'000LL);
  const std::vector<std::string> ssids = {"lab", "caf\xc3\xa9", "quote\"d", "", "\xe6\xb5\x8b\xe8\xaf\x95"};
  std::vector<ips::FingerprintSample> out;
  for (std::size_t i = 0; i < count; ++i) {
    ips::FingerprintSample s;
    s.point_id = "rp-" + std::to_string(rng() % 1000);
    s.x = coord(rng);
    s.y = coord(rng);
    s.heading = ips::kAllHeadings[rng() % 4];
    s.timestamp = ips::Timestamp::from_unix(t(rng));
    s.device_id = "dev-" + std::to_string(rng() % 5);
    const int n = n_readings(rng);
    for (int k = 0; k < n; ++k) {
      ips::AccessPointId ap;
      // octet 5 = k keeps the readings of one sample distinct
      ap.bssid = ips::Bssid({static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                             static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                             static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(k)});
      ap.band = (rng() & 1) ? ips::Band::Band5GHz : ips::Band::Band2_4GHz;
      if (rng() % 3 != 0) ap.ssid = ssids[rng() % ssids.size()];
      s.readings.push_back({ap, rssi(rng)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace test
