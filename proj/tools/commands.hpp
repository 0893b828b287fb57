#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace ips::cli {

struct SimulateOptions {
  std::string scenario;
  std::string out_dir;
  double rp_spacing = 1.0;
  int scans_per_cell = 200;
  std::optional<std::uint64_t> seed;
};

struct TrainOptions {
  std::string samples;
  std::string area;
  std::string out_dir;
  double spacing = 1.0;
  std::string hyper_policy = "grid-search";
  double min_presence = 0.2;
};

struct BenchmarkOptions {
  std::string scenario;
  double rp_spacing = 1.0;
  int scans_per_cell = 50;
  int test_points = 200;
  double spacing = 1.0;
  std::string hyper_policy = "grid-search";
  std::uint64_t seed = 0;
  std::string out;
  bool heading_known = false;
  bool test_at_rps = false;
  std::optional<double> shadowing_std;
  bool no_dropout = false;
  int min_match = 3;
  int top_k = 5;
  double min_presence = 0.2;
};

struct EvalOptions {
  std::string radiomap;
  std::string observations;
  std::string out_dir;
  bool heading_known = false;
  int min_match = 3;
  int top_k = 5;
};

struct ServeOptions {
  std::string data_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
};

// Each command returns the process exit code. Data goes to `out`, diagnostics to `err`.

/// Writes <out_dir>/samples.jsonl and <out_dir>/area.json.
int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err);
/// Writes sparse_map.json, radiomap.json and report.json; removes them on failure.
int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err);
/// Prints the metrics JSON and writes it to o.out when set.
int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out, std::ostream& err);
/// Localizes every sample record against a radio map; writes accuracy.csv and summary.json.
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);
/// Blocks until SIGINT/SIGTERM.
int cmd_serve(const ServeOptions& o, std::ostream& out, std::ostream& err);

}  // namespace ips::cli
