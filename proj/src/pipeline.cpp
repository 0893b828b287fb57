#include "ips/pipeline.hpp"

#include <chrono>
#include <cmath>

#include "ips/error.hpp"

namespace ips {

void validate_train_config(const TrainConfig& config) {
  if (!(config.spacing > 0.0) || !std::isfinite(config.spacing)) {
    throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  }
  if (!(config.min_presence >= 0.0 && config.min_presence <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_presence must lie in [0, 1]");
  }
  validate_hyperparams(config.fixed);
}

TrainResult train_radio_map(std::span<const FingerprintSample> samples, const SurveyArea& area,
                            const TrainConfig& config) {
  validate_train_config(config);
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.sparse = fit_distributions(samples, area, config.min_presence);
  DensifyOptions options;
  options.spacing = config.spacing;
  options.policy = config.policy;
  options.fixed = config.fixed;
  result.dense = densify(result.sparse, options);
  result.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

nlohmann::ordered_json training_report(const TrainConfig& config, const TrainResult& result, std::size_t sample_count) {
  nlohmann::ordered_json r;
  nlohmann::ordered_json params;
  params["spacing"] = config.spacing;
  params["hyper_policy"] = hyper_policy_name(config.policy);
  params["min_presence"] = config.min_presence;
  params["fixed_hyperparams"] = hyperparams_to_json(config.fixed);
  params["sigma_floor_db"] = kSigmaFloorDb;
  params["sigma_cap_db"] = kSigmaCapDb;
  params["kernel"] = "squared-exponential";
  r["parameters"] = std::move(params);
  r["samples"] = sample_count;
  r["reference_points"] = result.sparse.area.reference_points.size();
  r["access_points"] = result.sparse.ap_index.size();
  const GridSpec& g = result.dense.grid();
  r["grid"] = {{"width", g.width}, {"height", g.height}, {"spacing", g.spacing}, {"nx", g.nx}, {"ny", g.ny}};
  auto surfaces = nlohmann::ordered_json::array();
  for (const auto& s : result.dense.surfaces()) {
    nlohmann::ordered_json o;
    o["heading"] = std::string(1, heading_label(s.heading));
    o["bssid"] = s.ap.bssid.str();
    o["band"] = band_label(s.ap.band);
    o["hyperparams"] = {{"mean", hyperparams_to_json(s.mean_hyperparams)}, {"std", hyperparams_to_json(s.std_hyperparams)}};
    surfaces.push_back(std::move(o));
  }
  r["surfaces"] = std::move(surfaces);
  auto skipped = nlohmann::ordered_json::array();
  for (const auto& s : result.dense.skipped()) {
    nlohmann::ordered_json o;
    o["heading"] = std::string(1, heading_label(s.heading));
    o["bssid"] = s.ap.bssid.str();
    o["band"] = band_label(s.ap.band);
    o["cells"] = s.cells;
    skipped.push_back(std::move(o));
  }
  r["skipped"] = std::move(skipped);
  r["wall_clock_s"] = result.wall_clock_s;
  return r;
}

void validate_benchmark_config(const BenchmarkConfig& config) {
  validate_scenario(config.scenario);
  validate_train_config(config.train);
  if (!(config.rp_spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "rp spacing must be positive");
  if (config.scans_per_cell < 1) throw Error(ErrorCode::InvalidArgument, "scans_per_cell must be at least 1");
  if (config.test_point_count < 1) throw Error(ErrorCode::InvalidArgument, "test_point_count must be at least 1");
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config) {
  validate_benchmark_config(config);
  SimScenario scenario = config.scenario;
  scenario.rng_seed = config.seed;
  if (scenario.area.reference_points.empty()) {
    scenario.area.reference_points = interior_grid(scenario.area.width, scenario.area.height, config.rp_spacing);
  }
  const auto& rps = scenario.area.reference_points;
  if (rps.empty()) throw Error(ErrorCode::InvalidArgument, "rp spacing leaves no reference points in the area");

  const auto samples = simulate_survey(scenario, rps, config.scans_per_cell);
  const TrainResult trained = train_radio_map(samples, scenario.area, config.train);

  std::vector<TruthObservation> tests;
  tests.reserve(static_cast<std::size_t>(config.test_point_count));
  for (int k = 0; k < config.test_point_count; ++k) {
    SimRng rng = SimRng::derive(scenario.rng_seed, static_cast<std::uint64_t>(SimStream::Test), static_cast<std::uint64_t>(k));
    Point2 pos;
    if (config.test_at_rps) {
      const auto idx = std::min(rps.size() - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(rps.size())));
      pos = {rps[idx].x, rps[idx].y};
    } else {
      pos = {rng.uniform() * scenario.area.width, rng.uniform() * scenario.area.height};
    }
    const Heading heading = kAllHeadings[std::min<std::size_t>(3, static_cast<std::size_t>(rng.uniform() * 4.0))];
    Observation obs = simulate_rssi(scenario, pos, heading, rng);
    if (config.heading_known) obs.heading_hint = heading;
    tests.push_back({std::move(obs), pos});
  }

  BenchmarkResult result;
  result.sample_count = samples.size();
  result.surface_count = trained.dense.surfaces().size();
  result.evaluation = evaluate(tests, trained.dense, config.localizer);
  std::size_t correct = 0;
  for (const auto& rec : result.evaluation.records) {
    if (trained.dense.grid().cell_of(rec.ground_truth.x, rec.ground_truth.y) == rec.estimate.top_cells.front().cell) {
      ++correct;
    }
  }
  if (!result.evaluation.records.empty()) {
    result.correct_cell_fraction = static_cast<double>(correct) / static_cast<double>(result.evaluation.records.size());
  }
  return result;
}

nlohmann::ordered_json metrics_json(const AccuracySummary& summary) {
  nlohmann::ordered_json j;
  j["mean_error_m"] = summary.mean_error_m;
  j["std_error_m"] = summary.std_error_m;
  j["n"] = summary.n;
  j["skipped"] = summary.skipped;
  return j;
}

}  // namespace ips
