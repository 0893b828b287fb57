#pragma once

#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ips/fingerprint.hpp"

namespace ips {

inline constexpr double kSigmaFloorDb = 1.0;
inline constexpr double kDefaultMinPresence = 0.2;
inline constexpr double kReferencePointToleranceM = 0.01;

/// Normal fit of the RSS of one access point at one reference point and heading.
struct CellDistribution {
  double mean_dbm = 0.0;
  double std_dbm = kSigmaFloorDb;
  int sample_count = 0;
};

struct CellKey {
  std::string point_id;
  Heading heading = Heading::N;
  AccessPointId ap;

  friend bool operator==(const CellKey&, const CellKey&) = default;
  friend auto operator<=>(const CellKey& a, const CellKey& b) {
    return std::tie(a.point_id, a.heading, a.ap) <=> std::tie(b.point_id, b.heading, b.ap);
  }
};

struct SparseRadioMap {
  SurveyArea area;
  std::map<CellKey, CellDistribution> cells;
  /// Every access point that has at least one fitted cell, sorted by identity.
  std::vector<AccessPointId> ap_index;

  const ReferencePoint* find_reference_point(const std::string& point_id) const;
};

/// Fits a normal distribution per (reference point, heading, access point).
/// Missing readings are excluded rather than imputed; an AP enters a cell only if it
/// was heard in at least min_presence of that cell's scans. Std is the n-1 sample std
/// clamped to kSigmaFloorDb.
/// Throws EmptyInput or UnknownReferencePoint.
SparseRadioMap fit_distributions(std::span<const FingerprintSample> samples, const SurveyArea& area,
                                 double min_presence = kDefaultMinPresence);

struct CoverageKey {
  Heading heading;
  AccessPointId ap;
  friend bool operator==(const CoverageKey&, const CoverageKey&) = default;
  friend auto operator<=>(const CoverageKey& a, const CoverageKey& b) {
    return std::tie(a.heading, a.ap) <=> std::tie(b.heading, b.ap);
  }
};

/// Reference points with a fitted cell, per (heading, ap). Headings and APs without
/// any cell are reported with zero for every ap in ap_index.
std::map<CoverageKey, int> coverage_report(const SparseRadioMap& map);

nlohmann::ordered_json sparse_map_to_json(const SparseRadioMap& map);
SparseRadioMap sparse_map_from_json(const nlohmann::json& j);

}  // namespace ips
