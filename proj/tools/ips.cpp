#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace ips::cli;
  CLI::App app{"Indoor positioning from WiFi RSSI fingerprints"};
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a four-heading survey of a scenario");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out-dir", sim.out_dir, "Output directory (samples.jsonl, area.json)")->required();
  simulate->add_option("--rp-spacing", sim.rp_spacing, "Reference point grid spacing, m")
      ->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--scans-per-cell", sim.scans_per_cell, "Scans per reference point and heading")
      ->capture_default_str()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Override the scenario seed");

  TrainOptions tr;
  auto* train = app.add_subcommand("train", "Fit per-cell Gaussians and densify with GPR");
  train->add_option("--samples", tr.samples, "Survey samples JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--area", tr.area, "Survey area JSON")->required()->check(CLI::ExistingFile);
  train->add_option("--out-dir", tr.out_dir, "Output directory")->required();
  train->add_option("--spacing", tr.spacing, "Dense grid spacing, m")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--hyper-policy", tr.hyper_policy, "GPR hyperparameters: fixed | grid-search")
      ->capture_default_str()->check(CLI::IsMember({"fixed", "grid-search"}));
  train->add_option("--min-presence", tr.min_presence, "Minimum fraction of scans an AP must be heard in")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));

  BenchmarkOptions bm;
  auto* bench = app.add_subcommand("benchmark", "Simulate, train and evaluate end to end");
  bench->add_option("--scenario", bm.scenario, "Scenario JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--rp-spacing", bm.rp_spacing, "Reference point spacing, m")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--scans-per-cell", bm.scans_per_cell, "Survey scans per reference point and heading")
      ->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--test-points", bm.test_points, "Number of test observations")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--spacing", bm.spacing, "Dense grid spacing, m")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--hyper-policy", bm.hyper_policy, "fixed | grid-search")
      ->capture_default_str()->check(CLI::IsMember({"fixed", "grid-search"}));
  bench->add_option("--seed", bm.seed, "Random seed")->capture_default_str();
  bench->add_option("--out", bm.out, "Write metrics JSON here");
  bench->add_flag("--heading-known", bm.heading_known, "Pass the true heading to the localizer");
  bench->add_flag("--test-at-rps", bm.test_at_rps, "Test at reference point centers instead of uniform positions");
  bench->add_option("--shadowing-std", bm.shadowing_std, "Override every AP's shadowing std, dB")->check(CLI::NonNegativeNumber);
  bench->add_flag("--no-dropout", bm.no_dropout, "Disable weak-signal dropout");
  bench->add_option("--min-match", bm.min_match, "Minimum shared APs per score")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--top-k", bm.top_k, "Cells in the weighted centroid")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--min-presence", bm.min_presence, "Minimum AP presence per cell")
      ->capture_default_str()->check(CLI::Range(0.0, 1.0));

  EvalOptions ev;
  auto* eval = app.add_subcommand("eval", "Localize recorded scans with ground truth against a radio map");
  eval->add_option("--radiomap", ev.radiomap, "radiomap.json")->required()->check(CLI::ExistingFile);
  eval->add_option("--observations", ev.observations, "Sample JSONL; x, y are ground truth")->required()->check(CLI::ExistingFile);
  eval->add_option("--out-dir", ev.out_dir, "Output directory (accuracy.csv, summary.json)")->required();
  eval->add_flag("--heading-known", ev.heading_known, "Use each record's heading as a hint");
  eval->add_option("--min-match", ev.min_match, "Minimum shared APs per score")->capture_default_str()->check(CLI::PositiveNumber);
  eval->add_option("--top-k", ev.top_k, "Cells in the weighted centroid")->capture_default_str()->check(CLI::PositiveNumber);

  ServeOptions sv;
  auto* serve = app.add_subcommand("serve", "Run the HTTP survey and localization service");
  serve->add_option("--data-dir", sv.data_dir, "Session storage directory")->required();
  serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv.port, "TCP port")->capture_default_str()->check(CLI::Range(0, 65535));

  CLI11_PARSE(app, argc, argv);

  if (*simulate) return cmd_simulate(sim, std::cout, std::cerr);
  if (*train) return cmd_train(tr, std::cout, std::cerr);
  if (*bench) return cmd_benchmark(bm, std::cout, std::cerr);
  if (*eval) return cmd_eval(ev, std::cout, std::cerr);
  if (*serve) return cmd_serve(sv, std::cout, std::cerr);
  return 1;
}
