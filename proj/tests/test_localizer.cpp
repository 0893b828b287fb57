#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ips/error.hpp"
#include "ips/localizer.hpp"
#include "oracles.hpp"

using namespace ips;

namespace {

AccessPointId ap(int k) {
  return {Bssid({0x02, 0, 0, 0, static_cast<std::uint8_t>(k / 2), 0}), k % 2 == 0 ? Band::Band2_4GHz : Band::Band5GHz,
          std::nullopt};
}

/// nx x 1 strip with one heading; means[a][c], uniform std.
DenseRadioMap strip(const std::vector<std::vector<double>>& means, double sd = 2.0, Heading h = Heading::N) {
  const int nx = static_cast<int>(means.front().size());
  std::vector<RadioSurface> surfaces;
  for (std::size_t a = 0; a < means.size(); ++a) {
    RadioSurface s;
    s.heading = h;
    s.ap = ap(static_cast<int>(a));
    s.mean_dbm = means[a];
    s.std_dbm.assign(means[a].size(), sd);
    surfaces.push_back(std::move(s));
  }
  return DenseRadioMap(GridSpec{static_cast<double>(nx), 1.0, 1.0, nx, 1}, std::move(surfaces));
}

Observation obs_of(const std::vector<int>& rssi) {
  Observation o;
  for (std::size_t a = 0; a < rssi.size(); ++a) o.readings.push_back({ap(static_cast<int>(a)), rssi[a]});
  return o;
}

Observation random_observation(std::mt19937_64& rng, int ap_count) {
  Observation o;
  std::uniform_int_distribution<int> rssi(-95, -30);
  for (int a = 0; a < ap_count; ++a) {
    if (rng() % 5 != 0) o.readings.push_back({ap(a), rssi(rng)});
  }
  // an AP the map has never seen is ignored
  o.readings.push_back({{Bssid({0x0a, 1, 1, 1, 1, 1}), Band::Band5GHz, std::nullopt}, -40});
  return o;
}

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an ips::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("gaussian log density") {
  CHECK(gaussian_log_density(-60, -60, 1.0) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)));
  CHECK(gaussian_log_density(-58, -60, 2.0) ==
        doctest::Approx(-0.5 * std::log(2 * std::numbers::pi * 4.0) - 0.5).epsilon(1e-14));
}

TEST_CASE("score_cell") {
  const auto map = strip({{-50, -60, -70}, {-70, -60, -50}, {-65, -55, -65}});
  SUBCASE("observation equal to a cell's means scores highest there") {
    const auto o = obs_of({-60, -60, -55});
    const double at1 = *score_cell(o, map, 1, Heading::N);
    CHECK(at1 == doctest::Approx(3 * gaussian_log_density(0, 0, 2.0)));
    CHECK(*score_cell(o, map, 0, Heading::N) < at1);
    CHECK(*score_cell(o, map, 2, Heading::N) < at1);
  }
  SUBCASE("too few shared APs") {
    const auto o = obs_of({-60});
    CHECK_FALSE(score_cell(o, map, 0, Heading::N).has_value());
    CHECK(score_cell(o, map, 0, Heading::N, 1).has_value());
    CHECK_FALSE(score_cell(obs_of({-60, -60, -55}), map, 0, Heading::S).has_value());
  }
  SUBCASE("hand computed two-cell, two-AP log likelihood") {
    const auto two = strip({{-50, -60}, {-70, -80}}, 1.0);
    const auto o = obs_of({-52, -71});
    // cell 0: z = (-2, -1) -> -log(2 pi) - (4 + 1) / 2
    CHECK(*score_cell(o, two, 0, Heading::N, 2) == doctest::Approx(-std::log(2 * std::numbers::pi) - 2.5).epsilon(1e-14));
    // cell 1: z = (8, 9) -> -log(2 pi) - (64 + 81) / 2
    CHECK(*score_cell(o, two, 1, Heading::N, 2) == doctest::Approx(-std::log(2 * std::numbers::pi) - 72.5).epsilon(1e-14));
  }
}

TEST_CASE("localize") {
  const auto map = strip({{-50, -55, -60, -65, -70, -75, -80}, {-80, -75, -70, -65, -60, -55, -50}, {-60, -60, -60, -60, -60, -60, -60}});
  const auto o = obs_of({-60, -70, -60});
  SUBCASE("top_k = 1 returns the best cell's center") {
    const auto est = localize(o, map, {1, 3});
    CHECK(est.x == 2.5);
    CHECK(est.y == 0.5);
    CHECK(est.top_cells.size() == 1);
    CHECK(est.top_cells[0].cell == 2);
    CHECK(est.matched_ap_count == 3);
    CHECK(est.heading_est == Heading::N);
  }
  SUBCASE("top_k = 5 stays inside the hull of its cells") {
    const auto est = localize(o, map);
    REQUIRE(est.top_cells.size() == 5);
    double lo = 1e9, hi = -1e9;
    for (const auto& c : est.top_cells) {
      lo = std::min(lo, map.grid().center(c.cell).x);
      hi = std::max(hi, map.grid().center(c.cell).x);
    }
    CHECK(est.x >= lo);
    CHECK(est.x <= hi);
    for (std::size_t i = 1; i < est.top_cells.size(); ++i) {
      CHECK(est.top_cells[i - 1].log_likelihood >= est.top_cells[i].log_likelihood);
    }
  }
  SUBCASE("errors") {
    CHECK(code_of([&] { localize(obs_of({-60}), map); }) == ErrorCode::InsufficientOverlap);
    CHECK(code_of([&] { localize(o, DenseRadioMap{}); }) == ErrorCode::EmptyRadioMap);
    CHECK(code_of([&] { localize(Observation{}, map); }) == ErrorCode::EmptyReadings);
    CHECK(code_of([&] { localize(obs_of({-60, 4, -60}), map); }) == ErrorCode::OutOfRangeRssi);
  }
  SUBCASE("exact ties go to the lower cell index") {
    const auto flat = strip({{-60, -60, -60}, {-60, -60, -60}, {-60, -60, -60}});
    const auto est = localize(obs_of({-60, -60, -60}), flat, {1, 3});
    CHECK(est.top_cells[0].cell == 0);
  }
}

TEST_CASE("localizer agrees with the brute-force oracle") {
  std::mt19937_64 rng(123);
  for (int trial = 0; trial < 40; ++trial) {
    const int nx = 1 + static_cast<int>(rng() % 12), ny = 1 + static_cast<int>(rng() % 12);
    const int aps = 3 + static_cast<int>(rng() % 6);
    const auto map = oracle::random_map(rng, nx, ny, aps);
    auto o = random_observation(rng, aps);
    if (trial % 3 == 0) o.heading_hint = kAllHeadings[rng() % 4];
    const LocalizerOptions opt{1 + static_cast<int>(rng() % 6), 3};
    const auto want = oracle::brute_force_localize(o, map, opt.top_k, opt.min_match);
    if (!want) {
      CHECK(code_of([&] { localize(o, map, opt); }) == ErrorCode::InsufficientOverlap);
      continue;
    }
    const auto got = localize(o, map, opt);
    CHECK(got.top_cells.front().cell == want->cell);
    CHECK(got.heading_est == want->heading);
    CHECK(std::abs(got.x - want->x) <= 1e-12);
    CHECK(std::abs(got.y - want->y) <= 1e-12);
    CHECK(got.log_likelihood == doctest::Approx(want->log_likelihood).epsilon(1e-12));
    if (o.heading_hint) CHECK(got.heading_est == *o.heading_hint);
    REQUIRE(got.top_cells.size() == want->top_cells.size());
    for (std::size_t i = 0; i < got.top_cells.size(); ++i) CHECK(got.top_cells[i].cell == want->top_cells[i]);
  }
}

TEST_CASE("shifting the map and the observation together keeps the argmax") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto map = oracle::random_map(rng, 6, 5, 4);
    auto o = random_observation(rng, 4);
    std::vector<RadioSurface> shifted = map.surfaces();
    for (auto& s : shifted) {
      for (auto& m : s.mean_dbm) m -= 5.0;
    }
    const DenseRadioMap moved(map.grid(), shifted);
    auto o2 = o;
    for (auto& r : o2.readings) r.rssi_dbm -= 5;
    bool in_range = true;
    for (const auto& r : o2.readings) in_range &= r.rssi_dbm >= kRssiMin;
    if (!in_range) continue;
    const auto a = oracle::brute_force_localize(o, map, 5, 3);
    if (!a) continue;
    const auto e1 = localize(o, map);
    const auto e2 = localize(o2, moved);
    CHECK(e1.top_cells.front().cell == e2.top_cells.front().cell);
    CHECK(e1.heading_est == e2.heading_est);
  }
}

TEST_CASE("localize is deterministic") {
  std::mt19937_64 rng(1);
  const auto map = oracle::random_map(rng, 14, 14, 8);
  const auto o = random_observation(rng, 8);
  const auto a = localize(o, map);
  for (int i = 0; i < 5; ++i) {
    const auto b = localize(o, map);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.log_likelihood == b.log_likelihood);
  }
}

TEST_CASE("error metric") {
  CHECK(euclidean_error({0, 0}, {3, 4}) == 5.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int i = 0; i < 200; ++i) {
    const Point2 a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
    CHECK(euclidean_error(a, b) == euclidean_error(b, a));
    CHECK(euclidean_error(a, c) <= euclidean_error(a, b) + euclidean_error(b, c) + 1e-12);
    CHECK(euclidean_error(a, a) == 0.0);
  }
}

TEST_CASE("accuracy summary") {
  const std::vector<double> one = {5.0};
  const auto s1 = summarize_errors(one);
  CHECK(s1.mean_error_m == 5.0);
  CHECK(s1.std_error_m == 0.0);
  CHECK(s1.single_record);
  const std::vector<double> two = {2.0, 4.0};
  const auto s2 = summarize_errors(two);
  CHECK(s2.mean_error_m == 3.0);
  CHECK(s2.std_error_m == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s2.n == 2);
  CHECK(code_of([] { summarize_errors(std::span<const double>{}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("evaluate") {
  // a single cell at (0.5, 0.5); truth at (3.5, 4.5) is 3-4-5 away
  const auto map = strip({{-50}, {-60}, {-70}});
  std::vector<TruthObservation> items = {{obs_of({-50, -60, -70}), {3.5, 4.5}}};
  auto ev = evaluate(items, map);
  REQUIRE(ev.records.size() == 1);
  CHECK(ev.records[0].error_m == 5.0);
  CHECK(ev.summary.mean_error_m == 5.0);
  CHECK(ev.summary.single_record);

  items.push_back({obs_of({-50}), {0, 0}});        // skipped: one shared AP
  items.push_back({obs_of({-50, -60, -70}), {0.5, 0.5}});
  ev = evaluate(items, map);
  CHECK(ev.records.size() == 2);
  CHECK(ev.skipped == std::vector<std::size_t>{1});
  CHECK(ev.summary.skipped == 1);
  CHECK(ev.summary.n == 2);
  CHECK(ev.summary.mean_error_m == 2.5);

  std::vector<TruthObservation> none = {{obs_of({-50}), {0, 0}}};
  const auto all_skipped = evaluate(none, map);
  CHECK(all_skipped.summary.n == 0);
  CHECK(all_skipped.summary.skipped == 1);
  CHECK(code_of([&] { evaluate(std::span<const TruthObservation>{}, map); }) == ErrorCode::EmptyInput);

  std::ostringstream csv;
  write_accuracy_csv(ev.records, csv);
  std::istringstream lines(csv.str());
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "gt_x,gt_y,est_x,est_y,heading_est,error_m,matched_aps");
  CHECK(first == "3.5,4.5,0.5,0.5,N,5,3");
}
