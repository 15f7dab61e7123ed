#include "sngr/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "sngr/metrics.hpp"

namespace sngr {

std::vector<Window> enumerate_windows(int pose_count, int window_size) {
  if (window_size < 1) throw std::invalid_argument("window size must be positive");
  if (pose_count < window_size)
    throw std::invalid_argument("need at least " + std::to_string(window_size) + " poses, got " +
                                std::to_string(pose_count));
  std::vector<Window> windows;
  windows.reserve(static_cast<std::size_t>(pose_count - window_size + 1));
  for (int t = 0; t + window_size <= pose_count; ++t) {
    Window w;
    w.start = t;
    for (int s = t; s < t + window_size; ++s) w.keys.push_back(pose_key(static_cast<std::uint32_t>(s)));
    windows.push_back(std::move(w));
  }
  return windows;
}

double window_score(const Eigen::Ref<const Eigen::MatrixXd>& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0)
    throw std::invalid_argument("window covariance must be square and nonempty");
  const Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) throw std::domain_error("window covariance is not positive definite");
  return std::max(0.0, std::log10(hi / lo));
}

Calibration calibrate_tau(std::span<const double> clean_scores,
                          std::span<const double> noisy_scores,
                          const std::vector<bool>& noisy_labels) {
  if (clean_scores.empty() || noisy_scores.empty())
    throw std::invalid_argument("calibration needs clean and noisy scores");
  if (noisy_scores.size() != noisy_labels.size())
    throw std::invalid_argument("noisy scores and labels differ in length");

  const double clean_max = *std::max_element(clean_scores.begin(), clean_scores.end());
  const double all_max = std::max(clean_max, *std::max_element(noisy_scores.begin(), noisy_scores.end()));
  const long first = std::max(0L, static_cast<long>(std::ceil(clean_max * 100.0 - 1e-9)));
  const long last = std::max(first, static_cast<long>(std::ceil(all_max * 100.0 - 1e-9)));

  Calibration best;
  double best_recall = -1.0;
  for (long k = first; k <= last; ++k) {
    const double tau = static_cast<double>(k) / 100.0;
    if (std::any_of(clean_scores.begin(), clean_scores.end(),
                    [&](double s) { return exceeds(s, tau); }))
      continue;
    std::vector<bool> triggered(noisy_scores.size());
    for (std::size_t i = 0; i < noisy_scores.size(); ++i) triggered[i] = exceeds(noisy_scores[i], tau);
    const PrecisionRecall pr = precision_recall(triggered, noisy_labels);
    const double recall = pr.recall.value_or(0.0);
    if (recall >= best_recall) {
      best_recall = recall;
      best = {tau, pr.precision, pr.recall};
    }
  }
  return best;
}

}  // namespace sngr
