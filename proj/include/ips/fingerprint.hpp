#pragma once

#include <array>
#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ips {

inline constexpr int kRssiMin = -100;
inline constexpr int kRssiMax = 0;
/// Reading value used online for "AP not heard". Never imputed during fitting.
inline constexpr int kRssiNotHeard = kRssiMin;

/// 48-bit MAC address. Canonical text form is lowercase, colon-separated.
class Bssid {
 public:
  Bssid() = default;
  explicit constexpr Bssid(std::array<std::uint8_t, 6> octets) : octets_(octets) {}

  /// Accepts hex pairs separated by ':' or '-', any case. Throws MalformedBssid.
  static Bssid parse(std::string_view text);

  std::string str() const;
  const std::array<std::uint8_t, 6>& octets() const noexcept { return octets_; }

  auto operator<=>(const Bssid&) const = default;

 private:
  std::array<std::uint8_t, 6> octets_{};
};

enum class Band : std::uint8_t { Band2_4GHz, Band5GHz };

/// "2.4" or "5".
std::string_view band_label(Band band) noexcept;
Band parse_band(std::string_view text);

/// One radio of an access point. Identity is (bssid, band); the SSID is display only.
struct AccessPointId {
  Bssid bssid;
  Band band = Band::Band2_4GHz;
  std::optional<std::string> ssid;

  friend bool operator==(const AccessPointId& a, const AccessPointId& b) noexcept {
    return a.bssid == b.bssid && a.band == b.band;
  }
  friend std::strong_ordering operator<=>(const AccessPointId& a, const AccessPointId& b) noexcept {
    if (auto c = a.bssid <=> b.bssid; c != 0) return c;
    return a.band <=> b.band;
  }

  std::string str() const;
};

/// Cardinal direction the device faces, clockwise from North.
enum class Heading : std::uint8_t { N = 0, E = 1, S = 2, W = 3 };

inline constexpr std::array<Heading, 4> kAllHeadings{Heading::N, Heading::E, Heading::S, Heading::W};

constexpr int heading_degrees(Heading h) noexcept { return static_cast<int>(h) * 90; }
/// Throws InvalidArgument unless degrees is one of 0, 90, 180, 270.
Heading heading_from_degrees(int degrees);
char heading_label(Heading h) noexcept;
Heading parse_heading_label(std::string_view label);

/// UTC instant with one-second resolution, rendered as ISO-8601 "YYYY-MM-DDTHH:MM:SSZ".
class Timestamp {
 public:
  Timestamp() = default;
  explicit Timestamp(std::chrono::sys_seconds t) : t_(t) {}
  static Timestamp from_unix(std::int64_t seconds) {
    return Timestamp(std::chrono::sys_seconds(std::chrono::seconds(seconds)));
  }
  static Timestamp now();
  /// Throws MalformedRecord on anything but the canonical form.
  static Timestamp parse(std::string_view text);

  std::string str() const;
  std::int64_t unix_seconds() const noexcept { return t_.time_since_epoch().count(); }

  auto operator<=>(const Timestamp&) const = default;

 private:
  std::chrono::sys_seconds t_{};
};

struct Reading {
  AccessPointId ap;
  int rssi_dbm = kRssiNotHeard;
};

struct FingerprintSample {
  std::string point_id;
  double x = 0.0;
  double y = 0.0;
  Heading heading = Heading::N;
  Timestamp timestamp;
  std::string device_id;
  /// Insertion order is preserved through serialization.
  std::vector<Reading> readings;
};

struct ReferencePoint {
  std::string point_id;
  double x = 0.0;
  double y = 0.0;
};

/// Rectangle with origin at the southwest corner, x east, y north.
struct SurveyArea {
  double width = 0.0;
  double height = 0.0;
  std::vector<ReferencePoint> reference_points;

  bool contains(double x, double y) const noexcept {
    return x >= 0.0 && x <= width && y >= 0.0 && y <= height;
  }
};

/// Throws InvalidArea on non-positive extent, out-of-bounds or duplicate reference points.
void validate_area(const SurveyArea& area);

/// Checks every sample invariant against the area. Returns the sample unchanged.
/// Throws OutOfRangeRssi, OutOfBoundsPosition, EmptyReadings or MalformedBssid
/// with the offending field named in the detail.
const FingerprintSample& validate_sample(const FingerprintSample& sample, const SurveyArea& area);

/// Reference points on a regular grid offset half a spacing from the walls.
std::vector<ReferencePoint> interior_grid(double width, double height, double spacing);

}  // namespace ips
