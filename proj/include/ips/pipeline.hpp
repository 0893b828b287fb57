#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ips/distribution.hpp"
#include "ips/localizer.hpp"
#include "ips/radio_map.hpp"
#include "ips/simulator.hpp"

namespace ips {

struct TrainConfig {
  double spacing = 1.0;
  HyperPolicy policy = HyperPolicy::GridSearch;
  double min_presence = kDefaultMinPresence;
  GprHyperparams fixed{};
};

/// Throws InvalidArgument for non-positive spacing or min_presence outside [0, 1].
void validate_train_config(const TrainConfig& config);

struct TrainResult {
  SparseRadioMap sparse;
  DenseRadioMap dense;
  double wall_clock_s = 0.0;
};

/// fit_distributions followed by densify.
TrainResult train_radio_map(std::span<const FingerprintSample> samples, const SurveyArea& area,
                            const TrainConfig& config);

/// Effective parameters, per-surface hyperparams, skipped surfaces and timing.
nlohmann::ordered_json training_report(const TrainConfig& config, const TrainResult& result, std::size_t sample_count);

struct BenchmarkConfig {
  SimScenario scenario;
  double rp_spacing = 1.0;
  int scans_per_cell = 50;
  int test_point_count = 200;
  TrainConfig train{};
  LocalizerOptions localizer{};
  std::uint64_t seed = 0;
  /// Localize with the true heading as a hint.
  bool heading_known = false;
  /// Draw test positions from reference point centers instead of uniformly.
  bool test_at_rps = false;
};

void validate_benchmark_config(const BenchmarkConfig& config);

struct BenchmarkResult {
  Evaluation evaluation;
  /// Fraction of evaluated observations whose best cell contains the true position.
  double correct_cell_fraction = 0.0;
  std::size_t sample_count = 0;
  std::size_t surface_count = 0;
};

/// simulate survey -> train -> simulate test scans with fresh noise -> evaluate.
/// The seed replaces the scenario's seed; every stage is deterministic in it.
BenchmarkResult run_benchmark(const BenchmarkConfig& config);

/// {"mean_error_m","std_error_m","n","skipped"}
nlohmann::ordered_json metrics_json(const AccuracySummary& summary);

}  // namespace ips
