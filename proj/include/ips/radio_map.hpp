#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ips/distribution.hpp"
#include "ips/fingerprint.hpp"
#include "ips/gpr.hpp"

namespace ips {

inline constexpr double kSigmaCapDb = 15.0;
inline constexpr std::size_t kMinCellsPerSurface = 3;

/// Cell-centered grid anchored at the southwest corner.
struct GridSpec {
  double width = 0.0;
  double height = 0.0;
  double spacing = 1.0;
  int nx = 0;
  int ny = 0;

  /// nx = ceil(width / spacing), ny = ceil(height / spacing).
  static GridSpec cover(double width, double height, double spacing);

  std::size_t cell_count() const noexcept { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
  /// Row-major: index = j * nx + i.
  Point2 center(std::size_t index) const noexcept {
    const auto i = static_cast<double>(index % static_cast<std::size_t>(nx));
    const auto j = static_cast<double>(index / static_cast<std::size_t>(nx));
    return {(i + 0.5) * spacing, (j + 0.5) * spacing};
  }
  /// Index of the cell containing (x, y), clamped to the grid.
  std::size_t cell_of(double x, double y) const noexcept;
};

struct RadioSurface {
  Heading heading = Heading::N;
  AccessPointId ap;
  GprHyperparams mean_hyperparams;
  GprHyperparams std_hyperparams;
  std::vector<double> mean_dbm;
  std::vector<double> std_dbm;
};

struct SkippedSurface {
  Heading heading = Heading::N;
  AccessPointId ap;
  std::size_t cells = 0;
};

/// Densified fingerprint: one Gaussian per grid cell for each (heading, ap).
class DenseRadioMap {
 public:
  DenseRadioMap() = default;
  DenseRadioMap(GridSpec grid, std::vector<RadioSurface> surfaces, std::vector<SkippedSurface> skipped = {});

  const GridSpec& grid() const noexcept { return grid_; }
  const std::vector<RadioSurface>& surfaces() const noexcept { return surfaces_; }
  const std::vector<SkippedSurface>& skipped() const noexcept { return skipped_; }
  bool empty() const noexcept { return surfaces_.empty() || grid_.cell_count() == 0; }

  const RadioSurface* find(Heading heading, const AccessPointId& ap) const;

 private:
  GridSpec grid_;
  std::vector<RadioSurface> surfaces_;
  std::vector<SkippedSurface> skipped_;
  std::map<std::pair<Heading, AccessPointId>, std::size_t> index_;
};

enum class HyperPolicy { Fixed, GridSearch };

std::string_view hyper_policy_name(HyperPolicy p) noexcept;
/// "fixed" or "grid-search". Throws InvalidArgument.
HyperPolicy parse_hyper_policy(std::string_view text);

struct DensifyOptions {
  double spacing = 1.0;
  HyperPolicy policy = HyperPolicy::Fixed;
  GprHyperparams fixed{};
  std::vector<GprHyperparams> candidates = default_hyperparam_grid();
};

/// GPR over the fitted means, and separately over the fitted stds, for every
/// (heading, ap) with at least kMinCellsPerSurface reference points. Dense std is
/// clamped to [kSigmaFloorDb, kSigmaCapDb]. Surfaces are ordered by (heading, ap).
/// Throws EmptySparseMap, InvalidArgument on non-positive spacing.
DenseRadioMap densify(const SparseRadioMap& sparse, const DensifyOptions& options);

nlohmann::ordered_json radio_map_to_json(const DenseRadioMap& map);
DenseRadioMap radio_map_from_json(const nlohmann::json& j);

nlohmann::ordered_json hyperparams_to_json(const GprHyperparams& h);

}  // namespace ips
