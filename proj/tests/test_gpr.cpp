#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ips/error.hpp"
#include "ips/gpr.hpp"
#include "ips/radio_map.hpp"
#include "oracles.hpp"

using namespace ips;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); }

std::vector<TrainingPoint> random_points(std::mt19937_64& rng, int n, double extent = 14.0) {
  std::uniform_real_distribution<double> pos(0.0, extent);
  std::uniform_real_distribution<double> val(-90.0, -30.0);
  std::vector<TrainingPoint> pts;
  while (static_cast<int>(pts.size()) < n) {
    const Point2 p{pos(rng), pos(rng)};
    bool close = false;
    for (const auto& q : pts) close |= std::hypot(p.x - q.position.x, p.y - q.position.y) < 0.05;
    if (!close) pts.push_back({p, val(rng)});
  }
  return pts;
}

/// Draw from a zero-mean GP at the given inputs using a plain Cholesky.
std::vector<TrainingPoint> gp_draw(std::mt19937_64& rng, const std::vector<Point2>& xs, const GprHyperparams& h) {
  std::vector<TrainingPoint> pts;
  for (const auto& x : xs) pts.push_back({x, 0.0});
  const auto k = oracle::covariance(pts, h);
  const std::size_t n = xs.size();
  oracle::Matrix l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = k[i][j];
      for (std::size_t m = 0; m < j; ++m) s -= l[i][m] * l[j][m];
      l[i][j] = i == j ? std::sqrt(s) : s / l[j][j];
    }
  }
  std::normal_distribution<double> z;
  std::vector<double> e(n);
  for (auto& v : e) v = z(rng);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) pts[i].value += l[i][j] * e[j];
    pts[i].value -= 60.0;
  }
  return pts;
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

const AccessPointId kAp{Bssid({2, 0, 0, 0, 0, 1}), Band::Band2_4GHz, std::nullopt};

}  // namespace

TEST_CASE("single training point") {
  const GprHyperparams h{6.0, 3.0, 2.0};
  const std::vector<TrainingPoint> pts = {{{0.0, 0.0}, -60.0}};
  const auto model = gpr_fit(pts, h);
  const auto at = gpr_predict(model, Point2{0.0, 0.0});
  CHECK(at.mean == doctest::Approx(-60.0).epsilon(1e-12));
  // sigma_f^2 - sigma_f^4 / (sigma_f^2 + sigma_n^2) = 36 - 1296 / 40
  CHECK(at.variance == doctest::Approx(3.6).epsilon(1e-12));
  const auto far = gpr_predict(model, Point2{100.0, 0.0});
  CHECK(far.mean == doctest::Approx(-60.0).epsilon(1e-12));
  CHECK(far.variance == doctest::Approx(36.0).epsilon(1e-12));
}

TEST_CASE("far field reverts to the target mean") {
  const GprHyperparams h{6.0, 1.0, 1.0};
  const std::vector<TrainingPoint> pts = {{{0, 0}, -50.0}, {{1, 0}, -60.0}, {{0, 1}, -70.0}};
  const auto p = gpr_predict(gpr_fit(pts, h), Point2{80.0, 80.0});
  CHECK(p.mean == doctest::Approx(-60.0).epsilon(1e-12));
  CHECK(p.variance == doctest::Approx(36.0).epsilon(1e-12));
}

TEST_CASE("three and five point instances match the explicit-inverse oracle") {
  const GprHyperparams h{6.0, 3.0, 2.0};
  const std::vector<TrainingPoint> three = {{{1, 1}, -55.0}, {{4, 2}, -63.0}, {{2, 5}, -71.0}};
  const auto m3 = gpr_fit(three, h);
  for (const Point2& probe : {Point2{1, 1}, Point2{2.5, 2.5}, Point2{10, 10}}) {
    const auto got = gpr_predict(m3, probe);
    const auto want = oracle::gp_predict(three, h, probe);
    CHECK(rel_err(got.mean, want.mean) <= 1e-10);
    CHECK(rel_err(got.variance, want.variance) <= 1e-10);
  }
  CHECK(rel_err(log_marginal_likelihood(m3), oracle::log_marginal_likelihood(three, h)) <= 1e-10);

  std::mt19937_64 rng(5);
  const auto five = random_points(rng, 5, 6.0);
  const auto m5 = gpr_fit(five, {8.0, 2.0, 1.5});
  std::uniform_real_distribution<double> pos(-1.0, 7.0);
  for (int i = 0; i < 10; ++i) {
    const Point2 probe{pos(rng), pos(rng)};
    const auto got = gpr_predict(m5, probe);
    const auto want = oracle::gp_predict(five, {8.0, 2.0, 1.5}, probe);
    CHECK(rel_err(got.mean, want.mean) <= 1e-10);
    CHECK(rel_err(got.variance, want.variance) <= 1e-10);
  }
  CHECK(gpr_predict(m5, std::span<const Point2>{}).empty());
}

TEST_CASE("fit errors") {
  const GprHyperparams h{};
  const std::vector<TrainingPoint> dup = {{{1, 1}, -50.0}, {{2, 2}, -55.0}, {{1, 1}, -52.0}};
  CHECK(code_of([&] { gpr_fit(dup, h); }) == ErrorCode::DuplicateInput);
  CHECK(code_of([&] { gpr_fit(std::span<const TrainingPoint>{}, h); }) == ErrorCode::InsufficientData);
  CHECK(code_of([&] { gpr_fit(dup, {0.0, 1.0, 1.0}); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { gpr_fit(dup, {1.0, 1.0, -1.0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("near-duplicate inputs without noise go through the jitter ladder") {
  std::vector<TrainingPoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({{5.0 + 1e-7 * i, 5.0}, -60.0 + 0.1 * i});
  const GprHyperparams h{6.0, 5.0, 0.0};
  const auto model = gpr_fit(pts, h);
  CHECK(model.jitter > 0.0);
  CHECK(model.jitter <= 1e-2 * 36.0);
  const auto p = gpr_predict(model, Point2{5.0, 5.0});
  CHECK(std::isfinite(p.mean));
  CHECK(p.variance >= 0.0);
}

TEST_CASE("hyperparameter selection") {
  std::mt19937_64 rng(17);
  const auto pts = random_points(rng, 8);
  SUBCASE("a single candidate is returned as is") {
    const std::vector<GprHyperparams> one = {{4.0, 2.5, 1.5}};
    CHECK(select_hyperparams(pts, one) == one[0]);
  }
  SUBCASE("picks the oracle's argmax") {
    const auto grid = default_hyperparam_grid();
    CHECK(grid.size() == 45);
    const auto chosen = select_hyperparams(pts, grid);
    double best = -1e300;
    GprHyperparams want;
    for (const auto& h : grid) {
      const double lml = oracle::log_marginal_likelihood(pts, h);
      if (lml > best) {
        best = lml;
        want = h;
      }
    }
    CHECK(chosen == want);
  }
  SUBCASE("recovers the generating length scale") {
    std::uniform_real_distribution<double> pos(0.0, 14.0);
    std::vector<Point2> xs;
    for (int i = 0; i < 40; ++i) xs.push_back({pos(rng), pos(rng)});
    std::mt19937_64 draw_rng(3);
    const auto draw = gp_draw(draw_rng, xs, {6.0, 2.0, 1.0});
    std::vector<GprHyperparams> candidates;
    for (double l : {0.5, 2.0, 8.0}) candidates.push_back({6.0, l, 1.0});
    double best = -1e300, best_l = 0.0;
    for (const auto& h : candidates) {
      const double lml = oracle::log_marginal_likelihood(draw, h);
      if (lml > best) {
        best = lml;
        best_l = h.length_scale;
      }
    }
    CHECK(best_l == 2.0);
    CHECK(select_hyperparams(draw, candidates).length_scale == 2.0);
  }
  SUBCASE("constant targets are deterministic") {
    std::vector<TrainingPoint> flat = pts;
    for (auto& p : flat) p.value = -70.0;
    const auto grid = default_hyperparam_grid();
    const auto a = select_hyperparams(flat, grid);
    const auto b = select_hyperparams(flat, grid);
    CHECK(a == b);
    const auto p = gpr_predict(gpr_fit(flat, a), Point2{3.0, 3.0});
    CHECK(p.mean == doctest::Approx(-70.0).epsilon(1e-12));
  }
  SUBCASE("too few points") {
    const auto grid = default_hyperparam_grid();
    CHECK(code_of([&] { select_hyperparams(std::span(pts).first(2), grid); }) == ErrorCode::InsufficientData);
    CHECK(code_of([&] { select_hyperparams(pts, std::span<const GprHyperparams>{}); }) == ErrorCode::InsufficientData);
  }
}

TEST_CASE("gpr properties on random instances") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> pos(-2.0, 16.0);
  std::uniform_real_distribution<double> hl(0.5, 6.0), hs(1.0, 10.0), hn(0.1, 4.0);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const auto pts = random_points(rng, n);
    const GprHyperparams h{hs(rng), hl(rng), hn(rng)};
    const auto model = gpr_fit(pts, h);
    REQUIRE(model.jitter == 0.0);

    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto permuted = gpr_fit(shuffled, h);

    auto mirrored = pts;
    for (auto& p : mirrored) p.position.x = 14.0 - p.position.x;
    const auto mirror = gpr_fit(mirrored, h);

    for (int k = 0; k < 8; ++k) {
      const Point2 probe{pos(rng), pos(rng)};
      const auto p = gpr_predict(model, probe);
      CHECK(p.variance >= 0.0);
      CHECK(p.variance <= h.signal_std * h.signal_std * (1 + 1e-12));
      const auto q = gpr_predict(permuted, probe);
      CHECK(rel_err(q.mean, p.mean) <= 1e-9);
      CHECK(std::abs(q.variance - p.variance) <= 1e-9 * h.signal_std * h.signal_std);
      const auto m = gpr_predict(mirror, Point2{14.0 - probe.x, probe.y});
      CHECK(rel_err(m.mean, p.mean) <= 1e-9);
      CHECK(std::abs(m.variance - p.variance) <= 1e-9 * h.signal_std * h.signal_std);
      const auto want = oracle::gp_predict(pts, h, probe);
      CHECK(rel_err(p.mean, want.mean) <= 1e-8);
    }
  }
}

TEST_CASE("noise-free fit interpolates its training targets") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TrainingPoint> pts;
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 4; ++j) pts.push_back({{1.0 + 3.0 * i, 1.0 + 3.0 * j}, -90.0 + 60.0 * (rng() % 1000) / 1000.0});
    }
    const auto model = gpr_fit(pts, {6.0, 1.0, 0.0});
    REQUIRE(model.jitter == 0.0);
    for (const auto& p : pts) CHECK(std::abs(gpr_predict(model, p.position).mean - p.value) <= 1e-6);
  }
}

namespace {

SparseRadioMap sparse_from(const SurveyArea& area, const std::vector<std::pair<std::string, double>>& means,
                           double sd = 2.0) {
  SparseRadioMap map;
  map.area = area;
  for (const auto& [id, m] : means) map.cells[{id, Heading::N, kAp}] = {m, sd, 10};
  map.ap_index = {kAp};
  return map;
}

}  // namespace

TEST_CASE("densify") {
  SUBCASE("reference points at cell centers are reproduced without noise") {
    const SurveyArea area{4.0, 4.0, {{"a", 0.5, 0.5}, {"b", 2.5, 1.5}, {"c", 1.5, 3.5}, {"d", 3.5, 3.5}}};
    DensifyOptions opt;
    opt.fixed = {6.0, 1.0, 0.0};
    const auto dense = densify(sparse_from(area, {{"a", -50}, {"b", -60}, {"c", -70}, {"d", -65}}), opt);
    REQUIRE(dense.surfaces().size() == 1);
    const auto& s = dense.surfaces()[0];
    CHECK(s.mean_dbm[dense.grid().cell_of(0.5, 0.5)] == doctest::Approx(-50.0).epsilon(1e-9));
    CHECK(s.mean_dbm[dense.grid().cell_of(2.5, 1.5)] == doctest::Approx(-60.0).epsilon(1e-9));
    CHECK(s.mean_dbm[dense.grid().cell_of(1.5, 3.5)] == doctest::Approx(-70.0).epsilon(1e-9));
    for (double v : s.std_dbm) {
      CHECK(v >= kSigmaFloorDb);
      CHECK(v <= kSigmaCapDb);
    }
  }
  SUBCASE("grid covers a non-integer area") {
    const SurveyArea area{13.75, 13.5, {{"a", 1, 1}, {"b", 5, 5}, {"c", 9, 2}}};
    const auto dense = densify(sparse_from(area, {{"a", -50}, {"b", -60}, {"c", -70}}), {});
    CHECK(dense.grid().nx == 14);
    CHECK(dense.grid().ny == 14);
    CHECK(dense.grid().cell_count() == 196);
    CHECK(dense.surfaces()[0].mean_dbm.size() == 196);
  }
  SUBCASE("surfaces with fewer than three reference points are skipped") {
    const SurveyArea area{6.0, 6.0, {{"a", 1, 1}, {"b", 5, 5}}};
    const auto dense = densify(sparse_from(area, {{"a", -50}, {"b", -60}}), {});
    CHECK(dense.surfaces().empty());
    REQUIRE(dense.skipped().size() == 1);
    CHECK(dense.skipped()[0].cells == 2);
    CHECK(dense.empty());
  }
  SUBCASE("empty sparse map") {
    CHECK(code_of([] { densify(SparseRadioMap{}, {}); }) == ErrorCode::EmptySparseMap);
  }
  SUBCASE("std surface is clamped") {
    const SurveyArea area{6.0, 6.0, {{"a", 1, 1}, {"b", 5, 5}, {"c", 1, 5}}};
    auto sparse = sparse_from(area, {{"a", -50}, {"b", -60}, {"c", -55}}, 40.0);
    const auto dense = densify(sparse, {});
    for (double v : dense.surfaces()[0].std_dbm) CHECK(v == kSigmaCapDb);
  }
  SUBCASE("json round trip") {
    const SurveyArea area{5.0, 3.0, {{"a", 1, 1}, {"b", 4, 2}, {"c", 2, 2.5}}};
    DensifyOptions opt;
    opt.policy = HyperPolicy::GridSearch;
    const auto dense = densify(sparse_from(area, {{"a", -50}, {"b", -61}, {"c", -57}}), opt);
    const auto text = radio_map_to_json(dense).dump();
    const auto back = radio_map_from_json(nlohmann::json::parse(text));
    CHECK(radio_map_to_json(back).dump() == text);
    CHECK(back.surfaces()[0].mean_hyperparams == dense.surfaces()[0].mean_hyperparams);
  }
}
