#include "ips/fingerprint.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "ips/error.hpp"

namespace ips {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfRangeRssi: return "OutOfRangeRssi";
    case ErrorCode::OutOfBoundsPosition: return "OutOfBoundsPosition";
    case ErrorCode::EmptyReadings: return "EmptyReadings";
    case ErrorCode::MalformedBssid: return "MalformedBssid";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::InvalidArea: return "InvalidArea";
    case ErrorCode::UnknownReferencePoint: return "UnknownReferencePoint";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::DuplicateInput: return "DuplicateInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::EmptySparseMap: return "EmptySparseMap";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::EmptyRadioMap: return "EmptyRadioMap";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::DegeneratePath: return "DegeneratePath";
    case ErrorCode::SessionNotFound: return "SessionNotFound";
    case ErrorCode::WrongState: return "WrongState";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::NotTrained: return "NotTrained";
    case ErrorCode::TrainingFailed: return "TrainingFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bssid Bssid::parse(std::string_view text) {
  // six pairs, five separators
  if (text.size() != 17) {
    throw Error(ErrorCode::MalformedBssid, "expected 17 characters, got '" + std::string(text) + "'");
  }
  const char sep = text[2];
  if (sep != ':' && sep != '-') {
    throw Error(ErrorCode::MalformedBssid, "bad separator in '" + std::string(text) + "'");
  }
  std::array<std::uint8_t, 6> octets{};
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t pos = i * 3;
    if (i > 0 && text[pos - 1] != sep) {
      throw Error(ErrorCode::MalformedBssid, "inconsistent separators in '" + std::string(text) + "'");
    }
    const int hi = hex_value(text[pos]);
    const int lo = hex_value(text[pos + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::MalformedBssid, "non-hex digit in '" + std::string(text) + "'");
    }
    octets[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return Bssid(octets);
}

std::string Bssid::str() const {
  char buf[18];
  std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", octets_[0], octets_[1], octets_[2],
                octets_[3], octets_[4], octets_[5]);
  return buf;
}

std::string_view band_label(Band band) noexcept { return band == Band::Band5GHz ? "5" : "2.4"; }

Band parse_band(std::string_view text) {
  if (text == "2.4") return Band::Band2_4GHz;
  if (text == "5") return Band::Band5GHz;
  throw Error(ErrorCode::MalformedRecord, "band must be \"2.4\" or \"5\", got '" + std::string(text) + "'");
}

std::string AccessPointId::str() const { return bssid.str() + "@" + std::string(band_label(band)); }

Heading heading_from_degrees(int degrees) {
  switch (degrees) {
    case 0: return Heading::N;
    case 90: return Heading::E;
    case 180: return Heading::S;
    case 270: return Heading::W;
    default: throw Error(ErrorCode::InvalidArgument, "heading must be 0, 90, 180 or 270, got " + std::to_string(degrees));
  }
}

char heading_label(Heading h) noexcept {
  constexpr char labels[] = {'N', 'E', 'S', 'W'};
  return labels[static_cast<int>(h)];
}

Heading parse_heading_label(std::string_view label) {
  if (label == "N") return Heading::N;
  if (label == "E") return Heading::E;
  if (label == "S") return Heading::S;
  if (label == "W") return Heading::W;
  throw Error(ErrorCode::InvalidArgument, "unknown heading '" + std::string(label) + "'");
}

Timestamp Timestamp::now() {
  return Timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

Timestamp Timestamp::parse(std::string_view text) {
  int yr = 0, mo = 0, dy = 0, hh = 0, mm = 0, ss = 0;
  char tail = 0;
  const std::string s(text);
  // %c after the seconds catches trailing garbage
  if (s.size() != 20 || std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%c", &yr, &mo, &dy, &hh, &mm, &ss, &tail) != 6 ||
      s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' || s[16] != ':' || s[19] != 'Z') {
    throw Error(ErrorCode::MalformedRecord, "timestamp must be YYYY-MM-DDTHH:MM:SSZ, got '" + s + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{yr}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(dy)}};
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw Error(ErrorCode::MalformedRecord, "timestamp out of range: '" + s + "'");
  }
  return Timestamp(sys_days(ymd) + hours(hh) + minutes(mm) + seconds(ss));
}

std::string Timestamp::str() const {
  using namespace std::chrono;
  const auto day_start = floor<days>(t_);
  const year_month_day ymd(day_start);
  const hh_mm_ss hms(t_ - day_start);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

void validate_area(const SurveyArea& area) {
  if (!std::isfinite(area.width) || !std::isfinite(area.height) || area.width <= 0.0 || area.height <= 0.0) {
    throw Error(ErrorCode::InvalidArea, "width and height must be positive and finite");
  }
  std::set<std::string> ids;
  for (const auto& rp : area.reference_points) {
    if (!std::isfinite(rp.x) || !std::isfinite(rp.y) || !area.contains(rp.x, rp.y)) {
      throw Error(ErrorCode::InvalidArea, "reference point '" + rp.point_id + "' lies outside the area");
    }
    if (!ids.insert(rp.point_id).second) {
      throw Error(ErrorCode::InvalidArea, "duplicate reference point id '" + rp.point_id + "'");
    }
  }
}

const FingerprintSample& validate_sample(const FingerprintSample& sample, const SurveyArea& area) {
  if (!std::isfinite(sample.x) || sample.x < 0.0 || sample.x > area.width) {
    throw Error(ErrorCode::OutOfBoundsPosition, "x=" + std::to_string(sample.x) + " outside [0, width]");
  }
  if (!std::isfinite(sample.y) || sample.y < 0.0 || sample.y > area.height) {
    throw Error(ErrorCode::OutOfBoundsPosition, "y=" + std::to_string(sample.y) + " outside [0, height]");
  }
  if (sample.readings.empty()) {
    throw Error(ErrorCode::EmptyReadings, "readings is empty");
  }
  for (std::size_t i = 0; i < sample.readings.size(); ++i) {
    const int r = sample.readings[i].rssi_dbm;
    if (r < kRssiMin || r > kRssiMax) {
      throw Error(ErrorCode::OutOfRangeRssi,
                  "readings[" + std::to_string(i) + "].rssi=" + std::to_string(r) + " outside [-100, 0]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (sample.readings[j].ap == sample.readings[i].ap) {
        throw Error(ErrorCode::MalformedRecord,
                    "readings[" + std::to_string(i) + "] repeats access point " + sample.readings[i].ap.str());
      }
    }
  }
  return sample;
}

std::vector<ReferencePoint> interior_grid(double width, double height, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "rp spacing must be positive");
  std::vector<ReferencePoint> out;
  const auto count = [spacing](double extent) {
    return static_cast<int>(std::floor(extent / spacing + 1e-9));
  };
  const int nx = count(width);
  const int ny = count(height);
  char id[32];
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      std::snprintf(id, sizeof(id), "rp-%03d", j * nx + i);
      out.push_back({id, (i + 0.5) * spacing, (j + 0.5) * spacing});
    }
  }
  return out;
}

}  // namespace ips
