#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ips {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

struct GprHyperparams {
  double signal_std = 6.0;    // sigma_f, dB
  double length_scale = 3.0;  // meters
  double noise_std = 2.0;     // sigma_n, dB

  friend bool operator==(const GprHyperparams&, const GprHyperparams&) = default;
};

/// Throws InvalidArgument unless signal_std > 0, length_scale > 0, noise_std >= 0.
void validate_hyperparams(const GprHyperparams& h);

/// Squared-exponential covariance sigma_f^2 exp(-|a-b|^2 / (2 l^2)).
double se_kernel(const Point2& a, const Point2& b, const GprHyperparams& h) noexcept;

struct TrainingPoint {
  Point2 position;
  double value = 0.0;
};

/// Zero-mean GP on centered targets with a constant offset restored at prediction.
struct GprModel {
  std::vector<Point2> inputs;
  Eigen::VectorXd centered_targets;
  double target_offset = 0.0;
  GprHyperparams hyperparams;
  /// Diagonal jitter added on top of noise_std^2 to make the factorization succeed.
  double jitter = 0.0;
  Eigen::MatrixXd cholesky_factor;  // lower-triangular L, L L^T = K + (noise^2 + jitter) I
  Eigen::VectorXd alpha;            // (K + (noise^2 + jitter) I)^-1 y_centered

  std::size_t size() const noexcept { return inputs.size(); }
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Throws DuplicateInput on repeated positions, InsufficientData on no points,
/// SingularKernel if the jitter ladder (1e-8 .. 1e-2 of sigma_f^2) is exhausted.
GprModel gpr_fit(std::span<const TrainingPoint> points, const GprHyperparams& hyperparams);

std::vector<Prediction> gpr_predict(const GprModel& model, std::span<const Point2> probes);
Prediction gpr_predict(const GprModel& model, const Point2& probe);

/// log p(y | X) = -1/2 y^T alpha - sum log L_ii - n/2 log(2 pi)
double log_marginal_likelihood(const GprModel& model);

/// l in {1,2,3,5,8} m, sigma_f in {3,6,10} dB, sigma_n in {1,2,4} dB.
std::vector<GprHyperparams> default_hyperparam_grid();

/// Candidate with the highest log marginal likelihood; ties go to the smallest
/// length_scale, then signal_std, then noise_std. Candidates whose kernel cannot be
/// factorized are skipped. Throws InsufficientData for fewer than 3 points or an
/// empty candidate list.
GprHyperparams select_hyperparams(std::span<const TrainingPoint> points, std::span<const GprHyperparams> candidates);

}  // namespace ips
