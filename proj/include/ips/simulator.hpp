#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <json.hpp>

#include "ips/fingerprint.hpp"
#include "ips/gpr.hpp"
#include "ips/localizer.hpp"

namespace ips {

/// Log-distance path loss with lognormal shadowing, referenced to d0 = 1 m.
struct PathLossParams {
  double tx_power_dbm = 15.0;
  double ref_loss_db = 40.0;
  double exponent = 2.4;
  double shadowing_std_db = 4.0;
  double body_attenuation_db = 3.0;
};

inline constexpr double kReferenceDistanceM = 1.0;
/// Below this pre-clamp level a reading is dropped with probability one half.
inline constexpr double kDropoutThresholdDbm = -95.0;

/// 2.4 GHz: PL0 40 dB, n 2.4. 5 GHz: PL0 46 dB, n 2.8. Both: 15 dBm, 4 dB shadowing, 3 dB body loss.
PathLossParams default_path_loss(Band band);

/// Throws InvalidArgument unless exponent > 0 and the std/attenuation terms are >= 0.
void validate_path_loss(const PathLossParams& p);

struct VirtualAp {
  AccessPointId id;
  Point2 position;
  PathLossParams params;
};

struct SimScenario {
  SurveyArea area;
  std::vector<VirtualAp> aps;
  std::uint64_t rng_seed = 0;
  /// Marginal-detection dropout below kDropoutThresholdDbm.
  bool dropout = true;
};

/// Throws InvalidArgument / InvalidArea on an inconsistent scenario.
void validate_scenario(const SimScenario& scenario);

/// Seeded generator for one stream of draws. Streams are derived from
/// (seed, stream tag, index) so per-position generation is order-independent.
class SimRng {
 public:
  explicit SimRng(std::uint64_t seed) : engine_(seed) {}
  static SimRng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Stream tags for SimRng::derive.
enum class SimStream : std::uint64_t { Survey = 1, Walk = 2, Test = 3 };

/// Noise-free received power before body loss: P_tx - PL0 - 10 n log10(max(d, d0) / d0).
double mean_rssi(const VirtualAp& ap, const Point2& position) noexcept;

/// True if the AP lies more than 90 degrees off the facing direction.
bool body_blocks(const Point2& position, Heading heading, const Point2& ap) noexcept;

/// One scan at a position. Throws OutOfBounds outside the area.
Observation simulate_rssi(const SimScenario& scenario, const Point2& position, Heading heading, SimRng& rng,
                          Timestamp timestamp = {});

/// scans_per_cell samples for every reference point and all four headings, in
/// (reference point, heading, scan) order. Each reference point uses its own derived stream.
std::vector<FingerprintSample> simulate_survey(const SimScenario& scenario, std::span<const ReferencePoint> rps,
                                               int scans_per_cell);

struct WalkEmission {
  Observation observation;
  Point2 truth;
  Heading heading = Heading::N;
};

/// Emissions every scan_period seconds along the polyline, endpoints included.
/// Heading is the cardinal nearest the direction of travel on the current leg.
/// Throws DegeneratePath for a zero-length path, OutOfBounds for waypoints outside the area.
std::vector<WalkEmission> simulate_walk(const SimScenario& scenario, std::span<const Point2> waypoints, double speed,
                                        double scan_period);

/// Cardinal direction nearest to a displacement vector.
Heading nearest_cardinal(double dx, double dy) noexcept;

nlohmann::ordered_json scenario_to_json(const SimScenario& scenario);
/// Optional keys: "dropout" (default true) and per-AP "ssid".
SimScenario scenario_from_json(const nlohmann::json& j);
SimScenario load_scenario(const std::string& path);

}  // namespace ips
