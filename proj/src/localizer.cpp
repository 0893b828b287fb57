#include "ips/localizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ips/error.hpp"

namespace ips {

void validate_observation(const Observation& obs) {
  if (obs.readings.empty()) throw Error(ErrorCode::EmptyReadings, "observation has no readings");
  for (std::size_t i = 0; i < obs.readings.size(); ++i) {
    const int r = obs.readings[i].rssi_dbm;
    if (r < kRssiMin || r > kRssiMax) {
      throw Error(ErrorCode::OutOfRangeRssi,
                  "readings[" + std::to_string(i) + "].rssi=" + std::to_string(r) + " outside [-100, 0]");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (obs.readings[j].ap == obs.readings[i].ap) {
        throw Error(ErrorCode::MalformedRecord, "readings[" + std::to_string(i) + "] repeats " + obs.readings[i].ap.str());
      }
    }
  }
}

double gaussian_log_density(double r, double mu, double sigma) noexcept {
  const double z = r - mu;
  return -0.5 * std::log(2.0 * std::numbers::pi * sigma * sigma) - z * z / (2.0 * sigma * sigma);
}

namespace {

struct Term {
  const RadioSurface* surface;
  double rssi;
};

/// Surfaces shared between the observation and the map, in observation order.
std::vector<Term> common_terms(const Observation& obs, const DenseRadioMap& map, Heading heading) {
  std::vector<Term> terms;
  for (const auto& r : obs.readings) {
    if (const RadioSurface* s = map.find(heading, r.ap)) terms.push_back({s, static_cast<double>(r.rssi_dbm)});
  }
  return terms;
}

double cell_log_likelihood(std::span<const Term> terms, std::size_t cell) noexcept {
  double ll = 0.0;
  for (const auto& t : terms) ll += gaussian_log_density(t.rssi, t.surface->mean_dbm[cell], t.surface->std_dbm[cell]);
  return ll;
}

bool ranks_before(const ScoredCell& a, const ScoredCell& b) noexcept {
  if (a.log_likelihood != b.log_likelihood) return a.log_likelihood > b.log_likelihood;
  if (a.cell != b.cell) return a.cell < b.cell;
  return a.heading < b.heading;
}

}  // namespace

std::optional<double> score_cell(const Observation& obs, const DenseRadioMap& map, std::size_t cell, Heading heading,
                                 int min_match) {
  if (cell >= map.grid().cell_count()) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
  const auto terms = common_terms(obs, map, heading);
  if (static_cast<int>(terms.size()) < min_match) return std::nullopt;
  return cell_log_likelihood(terms, cell);
}

PositionEstimate localize(const Observation& obs, const DenseRadioMap& map, const LocalizerOptions& options) {
  if (map.empty()) throw Error(ErrorCode::EmptyRadioMap, "radio map has no surfaces");
  if (options.top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be at least 1");
  validate_observation(obs);

  const std::size_t cells = map.grid().cell_count();
  std::optional<ScoredCell> best;
  std::vector<ScoredCell> best_heading_scores;
  int best_matched = 0;
  std::vector<ScoredCell> scores(cells);

  for (Heading h : kAllHeadings) {
    if (obs.heading_hint && *obs.heading_hint != h) continue;
    const auto terms = common_terms(obs, map, h);
    if (static_cast<int>(terms.size()) < options.min_match) continue;
    for (std::size_t c = 0; c < cells; ++c) scores[c] = {c, h, cell_log_likelihood(terms, c)};
    const auto top = std::min_element(scores.begin(), scores.end(), ranks_before);
    if (!best || ranks_before(*top, *best)) {
      best = *top;
      best_heading_scores = scores;
      best_matched = static_cast<int>(terms.size());
    }
  }
  if (!best) {
    throw Error(ErrorCode::InsufficientOverlap,
                "fewer than " + std::to_string(options.min_match) + " access points shared with the radio map");
  }

  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(options.top_k), cells);
  std::partial_sort(best_heading_scores.begin(), best_heading_scores.begin() + static_cast<std::ptrdiff_t>(k),
                    best_heading_scores.end(), ranks_before);
  best_heading_scores.resize(k);

  PositionEstimate est;
  est.heading_est = best->heading;
  est.log_likelihood = best->log_likelihood;
  est.matched_ap_count = best_matched;
  double wsum = 0.0, wx = 0.0, wy = 0.0;
  for (const auto& s : best_heading_scores) {
    const double w = std::exp(s.log_likelihood - best->log_likelihood);
    const Point2 p = map.grid().center(s.cell);
    wsum += w;
    wx += w * p.x;
    wy += w * p.y;
  }
  est.x = wx / wsum;
  est.y = wy / wsum;
  est.top_cells = std::move(best_heading_scores);
  return est;
}

double euclidean_error(const Point2& a, const Point2& b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

AccuracySummary summarize_errors(std::span<const double> errors, std::size_t skipped) {
  if (errors.empty()) throw Error(ErrorCode::EmptyInput, "no errors to summarize");
  AccuracySummary s;
  s.n = errors.size();
  s.skipped = skipped;
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean_error_m = sum / static_cast<double>(s.n);
  if (s.n == 1) {
    s.single_record = true;
    return s;
  }
  double ss = 0.0;
  for (double e : errors) ss += (e - s.mean_error_m) * (e - s.mean_error_m);
  s.std_error_m = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

Evaluation evaluate(std::span<const TruthObservation> items, const DenseRadioMap& map, const LocalizerOptions& options) {
  if (items.empty()) throw Error(ErrorCode::EmptyInput, "nothing to evaluate");
  Evaluation ev;
  std::vector<double> errors;
  for (std::size_t i = 0; i < items.size(); ++i) {
    try {
      PositionEstimate est = localize(items[i].observation, map, options);
      const double err = euclidean_error(items[i].truth, {est.x, est.y});
      ev.records.push_back({items[i].truth, std::move(est), err});
      errors.push_back(err);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientOverlap) throw;
      ev.skipped.push_back(i);
    }
  }
  if (errors.empty()) {
    ev.summary.skipped = ev.skipped.size();
  } else {
    ev.summary = summarize_errors(errors, ev.skipped.size());
  }
  return ev;
}

void write_accuracy_csv(std::span<const AccuracyRecord> records, std::ostream& out) {
  out << "gt_x,gt_y,est_x,est_y,heading_est,error_m,matched_aps\n";
  const auto old_precision = out.precision(17);
  for (const auto& r : records) {
    out << r.ground_truth.x << ',' << r.ground_truth.y << ',' << r.estimate.x << ',' << r.estimate.y << ','
        << heading_label(r.estimate.heading_est) << ',' << r.error_m << ',' << r.estimate.matched_ap_count << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ips
