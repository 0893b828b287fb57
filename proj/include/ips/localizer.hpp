#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ips/fingerprint.hpp"
#include "ips/radio_map.hpp"

namespace ips {

inline constexpr int kDefaultMinMatch = 3;
inline constexpr int kDefaultTopK = 5;

/// A live scan to be localized.
struct Observation {
  std::vector<Reading> readings;
  Timestamp timestamp;
  std::optional<Heading> heading_hint;
};

/// Throws EmptyReadings or OutOfRangeRssi.
void validate_observation(const Observation& obs);

struct ScoredCell {
  std::size_t cell = 0;
  Heading heading = Heading::N;
  double log_likelihood = 0.0;
};

struct PositionEstimate {
  double x = 0.0;
  double y = 0.0;
  Heading heading_est = Heading::N;
  double log_likelihood = 0.0;
  /// Best cells of heading_est, descending log-likelihood, lower index first on ties.
  std::vector<ScoredCell> top_cells;
  int matched_ap_count = 0;
};

struct LocalizerOptions {
  int top_k = kDefaultTopK;
  int min_match = kDefaultMinMatch;
};

/// log N(r; mu, sigma) = -1/2 log(2 pi sigma^2) - (r - mu)^2 / (2 sigma^2)
double gaussian_log_density(double r, double mu, double sigma) noexcept;

/// Sum of per-AP Gaussian log-densities over APs present in both the observation and
/// the map for this heading. nullopt when fewer than min_match APs are shared.
std::optional<double> score_cell(const Observation& obs, const DenseRadioMap& map, std::size_t cell, Heading heading,
                                 int min_match = kDefaultMinMatch);

/// Maximum-likelihood position over every (cell, heading); heading_hint restricts the
/// search to one heading. Position is the exp(LL - LL_max)-weighted centroid of the
/// top_k cells of the winning heading.
/// Throws EmptyRadioMap or InsufficientOverlap.
PositionEstimate localize(const Observation& obs, const DenseRadioMap& map, const LocalizerOptions& options = {});

struct AccuracyRecord {
  Point2 ground_truth;
  PositionEstimate estimate;
  double error_m = 0.0;
};

double euclidean_error(const Point2& a, const Point2& b) noexcept;

struct AccuracySummary {
  double mean_error_m = 0.0;
  /// Sample std (n-1); 0 when n == 1 (see single_record).
  double std_error_m = 0.0;
  std::size_t n = 0;
  std::size_t skipped = 0;
  bool single_record = false;
};

/// Mean and n-1 std of the errors. Throws EmptyInput on an empty span.
AccuracySummary summarize_errors(std::span<const double> errors, std::size_t skipped = 0);

struct TruthObservation {
  Observation observation;
  Point2 truth;
};

struct Evaluation {
  std::vector<AccuracyRecord> records;
  /// Indices into the input of observations that hit InsufficientOverlap.
  std::vector<std::size_t> skipped;
  AccuracySummary summary;
};

/// Throws EmptyInput on an empty sequence. If every observation is skipped the summary has n == 0.
Evaluation evaluate(std::span<const TruthObservation> items, const DenseRadioMap& map,
                    const LocalizerOptions& options = {});

/// gt_x,gt_y,est_x,est_y,heading_est,error_m,matched_aps with a header row.
void write_accuracy_csv(std::span<const AccuracyRecord> records, std::ostream& out);

}  // namespace ips
