#include "commands.hpp"

#include <csignal>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "ips/error.hpp"
#include "ips/http_service.hpp"
#include "ips/jsonl.hpp"
#include "ips/pipeline.hpp"
#include "ips/session_store.hpp"
#include "ips/simulator.hpp"

namespace ips::cli {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int run_guarded(std::ostream& err, const char* command, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "ips " << command << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_simulate(const SimulateOptions& o, std::ostream& out, std::ostream& err) {
  return run_guarded(err, "simulate", [&] {
    SimScenario scenario = load_scenario(o.scenario);
    if (o.seed) scenario.rng_seed = *o.seed;
    if (scenario.area.reference_points.empty()) {
      scenario.area.reference_points = interior_grid(scenario.area.width, scenario.area.height, o.rp_spacing);
    }
    err << "seed " << scenario.rng_seed << "\n";
    const auto samples = simulate_survey(scenario, scenario.area.reference_points, o.scans_per_cell);
    fs::create_directories(o.out_dir);
    write_jsonl_file(samples, (fs::path(o.out_dir) / "samples.jsonl").string());
    write_text_file_atomic((fs::path(o.out_dir) / "area.json").string(), area_to_json(scenario.area).dump(2) + "\n");
    out << samples.size() << "\n";
    return 0;
  });
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  const fs::path dir(o.out_dir);
  const fs::path artifacts[] = {dir / "sparse_map.json", dir / "radiomap.json", dir / "report.json"};
  const int rc = run_guarded(err, "train", [&] {
    TrainConfig config;
    config.spacing = o.spacing;
    config.policy = parse_hyper_policy(o.hyper_policy);
    config.min_presence = o.min_presence;
    validate_train_config(config);

    const SurveyArea area = area_from_json(nlohmann::json::parse(read_text_file(o.area)));
    const auto samples = read_jsonl_file(o.samples);
    const TrainResult result = train_radio_map(samples, area, config);
    auto report = training_report(config, result, samples.size());
    report["inputs"] = {{"samples", o.samples}, {"area", o.area}};

    fs::create_directories(dir);
    write_text_file_atomic(artifacts[0].string(), sparse_map_to_json(result.sparse).dump() + "\n");
    write_text_file_atomic(artifacts[1].string(), radio_map_to_json(result.dense).dump() + "\n");
    write_text_file_atomic(artifacts[2].string(), report.dump(2) + "\n");
    out << report.dump(2) << "\n";
    return 0;
  });
  if (rc != 0) {
    std::error_code ec;
    for (const auto& p : artifacts) fs::remove(p, ec);
  }
  return rc;
}

int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out, std::ostream& err) {
  return run_guarded(err, "benchmark", [&] {
    BenchmarkConfig config;
    config.scenario = load_scenario(o.scenario);
    if (o.shadowing_std) {
      for (auto& ap : config.scenario.aps) ap.params.shadowing_std_db = *o.shadowing_std;
    }
    if (o.no_dropout) config.scenario.dropout = false;
    config.rp_spacing = o.rp_spacing;
    config.scans_per_cell = o.scans_per_cell;
    config.test_point_count = o.test_points;
    config.train.spacing = o.spacing;
    config.train.policy = parse_hyper_policy(o.hyper_policy);
    config.train.min_presence = o.min_presence;
    config.localizer.min_match = o.min_match;
    config.localizer.top_k = o.top_k;
    config.seed = o.seed;
    config.heading_known = o.heading_known;
    config.test_at_rps = o.test_at_rps;
    err << "seed " << o.seed << "\n";

    const BenchmarkResult result = run_benchmark(config);
    const std::string metrics = metrics_json(result.evaluation.summary).dump(2) + "\n";
    if (!o.out.empty()) {
      if (fs::path(o.out).has_parent_path()) fs::create_directories(fs::path(o.out).parent_path());
      write_text_file_atomic(o.out, metrics);
    }
    out << metrics;
    err << "samples " << result.sample_count << ", surfaces " << result.surface_count << ", correct cell "
        << result.correct_cell_fraction << "\n";
    return 0;
  });
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  return run_guarded(err, "eval", [&] {
    const DenseRadioMap map = radio_map_from_json(nlohmann::json::parse(read_text_file(o.radiomap)));
    const auto samples = read_jsonl_file(o.observations);
    std::vector<TruthObservation> items;
    items.reserve(samples.size());
    for (const auto& s : samples) {
      Observation obs{s.readings, s.timestamp, std::nullopt};
      if (o.heading_known) obs.heading_hint = s.heading;
      items.push_back({std::move(obs), {s.x, s.y}});
    }
    LocalizerOptions options;
    options.min_match = o.min_match;
    options.top_k = o.top_k;
    const Evaluation ev = evaluate(items, map, options);

    fs::create_directories(o.out_dir);
    std::ostringstream csv;
    write_accuracy_csv(ev.records, csv);
    write_text_file_atomic((fs::path(o.out_dir) / "accuracy.csv").string(), csv.str());
    const std::string summary = metrics_json(ev.summary).dump(2) + "\n";
    write_text_file_atomic((fs::path(o.out_dir) / "summary.json").string(), summary);
    out << summary;
    return 0;
  });
}

int cmd_serve(const ServeOptions& o, std::ostream& out, std::ostream& err) {
  return run_guarded(err, "serve", [&] {
    // block the shutdown signals in every thread so sigwait below receives them
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    SessionStore store(o.data_dir);
    HttpService service(store);
    const int port = service.bind(o.host, o.port);
    service.start();
    out << "listening on " << o.host << ":" << port << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    err << "signal " << sig << ", shutting down\n";
    service.stop();
    return 0;
  });
}

}  // namespace ips::cli
