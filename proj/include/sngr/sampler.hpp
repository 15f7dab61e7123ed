#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>

#include <Eigen/Core>

namespace sngr {

struct NsConfig {
  int n_live = 100;
  /// Random-walk steps per replacement; max(d, 9) when unset.
  std::optional<int> n_walks;
  double dlogz_stop = 0.5;
  int max_iterations = 200000;
  std::uint64_t seed = 0;

  int walks_for(int dim) const { return n_walks.value_or(std::max(dim, 9)); }
};

/// Inverse standard-normal CDF. Arguments are clamped to [1e-12, 1 - 1e-12].
double probit(double u);

/// Maps the unit hypercube onto N(mean, c Σ) through probit and the
/// Cholesky factor of c Σ.
class PriorTransform {
 public:
  PriorTransform(Eigen::VectorXd mean, const Eigen::MatrixXd& cov, double inflation = 1.0);

  Eigen::VectorXd operator()(const Eigen::VectorXd& u) const;

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  double inflation() const { return inflation_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd chol_;
  double inflation_;
};

/// Nested-sampling output. One sample per column of `points`; log weights
/// are normalized so the weights sum to one.
struct WeightedSamples {
  Eigen::MatrixXd points;
  Eigen::VectorXd log_weights;
  Eigen::VectorXd log_likelihoods;
  double log_evidence = 0.0;
  double log_evidence_err = 0.0;
  double information = 0.0;
  int iterations = 0;
  long likelihood_calls = 0;
  bool converged = false;

  Eigen::Index size() const { return points.cols(); }
  Eigen::VectorXd weights() const { return log_weights.array().exp(); }
};

using LogLikelihood = std::function<double(const Eigen::VectorXd&)>;

/// Static nested sampling with likelihood-constrained random-walk
/// replacements. Deterministic given cfg.seed.
WeightedSamples nested_sample(const LogLikelihood& loglike, const PriorTransform& prior,
                              const NsConfig& cfg);

Eigen::VectorXd weighted_mean(const WeightedSamples& ws);
double weighted_std(const WeightedSamples& ws, int axis);

/// Kish effective sample size divided by the sample count.
double ess_fraction(const WeightedSamples& ws);

/// Sarle's (skewness² + 1) / kurtosis from weighted central moments.
double bimodality_coefficient(const WeightedSamples& ws, int axis);

/// Column index of the highest-likelihood sample.
Eigen::Index best_sample(const WeightedSamples& ws);

}  // namespace sngr
