#include "ips/gpr.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>

#include "ips/error.hpp"

namespace ips {

void validate_hyperparams(const GprHyperparams& h) {
  if (!(h.signal_std > 0.0) || !(h.length_scale > 0.0) || !(h.noise_std >= 0.0) || !std::isfinite(h.signal_std) ||
      !std::isfinite(h.length_scale) || !std::isfinite(h.noise_std)) {
    throw Error(ErrorCode::InvalidArgument, "hyperparams need signal_std > 0, length_scale > 0, noise_std >= 0");
  }
}

double se_kernel(const Point2& a, const Point2& b, const GprHyperparams& h) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return h.signal_std * h.signal_std * std::exp(-(dx * dx + dy * dy) / (2.0 * h.length_scale * h.length_scale));
}

GprModel gpr_fit(std::span<const TrainingPoint> points, const GprHyperparams& hyperparams) {
  validate_hyperparams(hyperparams);
  if (points.empty()) throw Error(ErrorCode::InsufficientData, "gpr_fit needs at least one point");
  const auto n = static_cast<Eigen::Index>(points.size());

  GprModel model;
  model.hyperparams = hyperparams;
  model.inputs.reserve(points.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (points[j].position == points[i].position) {
        throw Error(ErrorCode::DuplicateInput, "training inputs " + std::to_string(j) + " and " + std::to_string(i) +
                                                   " share a position");
      }
    }
    model.inputs.push_back(points[i].position);
    sum += points[i].value;
  }
  model.target_offset = sum / static_cast<double>(n);
  model.centered_targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) model.centered_targets(i) = points[i].value - model.target_offset;

  Eigen::MatrixXd kernel(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double k = se_kernel(model.inputs[i], model.inputs[j], hyperparams);
      kernel(i, j) = k;
      kernel(j, i) = k;
    }
  }
  const double noise_var = hyperparams.noise_std * hyperparams.noise_std;
  const double signal_var = hyperparams.signal_std * hyperparams.signal_std;

  double jitter = 0.0;
  for (;;) {
    Eigen::MatrixXd k = kernel;
    k.diagonal().array() += noise_var + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) {
      model.jitter = jitter;
      model.cholesky_factor = llt.matrixL();
      model.alpha = llt.solve(model.centered_targets);
      return model;
    }
    jitter = jitter == 0.0 ? 1e-8 * signal_var : jitter * 10.0;
    if (jitter > 1e-2 * signal_var * (1.0 + 1e-9)) {
      throw Error(ErrorCode::SingularKernel, "Cholesky failed with jitter up to 1e-2 sigma_f^2");
    }
  }
}

Prediction gpr_predict(const GprModel& model, const Point2& probe) {
  const auto n = static_cast<Eigen::Index>(model.size());
  Eigen::VectorXd k_star(n);
  for (Eigen::Index i = 0; i < n; ++i) k_star(i) = se_kernel(model.inputs[i], probe, model.hyperparams);
  const Eigen::VectorXd v = model.cholesky_factor.triangularView<Eigen::Lower>().solve(k_star);
  const double signal_var = model.hyperparams.signal_std * model.hyperparams.signal_std;
  Prediction p;
  p.mean = k_star.dot(model.alpha) + model.target_offset;
  p.variance = std::max(0.0, signal_var - v.squaredNorm());
  return p;
}

std::vector<Prediction> gpr_predict(const GprModel& model, std::span<const Point2> probes) {
  std::vector<Prediction> out;
  out.reserve(probes.size());
  for (const auto& p : probes) out.push_back(gpr_predict(model, p));
  return out;
}

double log_marginal_likelihood(const GprModel& model) {
  const double n = static_cast<double>(model.size());
  return -0.5 * model.centered_targets.dot(model.alpha) -
         model.cholesky_factor.diagonal().array().log().sum() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<GprHyperparams> default_hyperparam_grid() {
  std::vector<GprHyperparams> grid;
  for (double length : {1.0, 2.0, 3.0, 5.0, 8.0}) {
    for (double signal : {3.0, 6.0, 10.0}) {
      for (double noise : {1.0, 2.0, 4.0}) grid.push_back({signal, length, noise});
    }
  }
  return grid;
}

GprHyperparams select_hyperparams(std::span<const TrainingPoint> points, std::span<const GprHyperparams> candidates) {
  if (points.size() < 3) throw Error(ErrorCode::InsufficientData, "hyperparameter selection needs at least 3 points");
  if (candidates.empty()) throw Error(ErrorCode::InsufficientData, "no hyperparameter candidates");

  const auto tie_key = [](const GprHyperparams& h) { return std::tie(h.length_scale, h.signal_std, h.noise_std); };
  std::optional<GprHyperparams> best;
  double best_lml = 0.0;
  std::optional<Error> last_error;
  for (const auto& candidate : candidates) {
    double lml = 0.0;
    try {
      lml = log_marginal_likelihood(gpr_fit(points, candidate));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularKernel) throw;
      last_error = e;
      continue;
    }
    if (!best || lml > best_lml || (lml == best_lml && tie_key(candidate) < tie_key(*best))) {
      best = candidate;
      best_lml = lml;
    }
  }
  if (!best) throw *last_error;
  return *best;
}

}  // namespace ips
