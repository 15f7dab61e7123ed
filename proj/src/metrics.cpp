#include "sngr/metrics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace sngr {

double rmse(std::span<const Pose2d> estimate, std::span<const Pose2d> ground_truth) {
  if (estimate.size() != ground_truth.size())
    throw std::invalid_argument("rmse: pose counts differ");
  if (estimate.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < estimate.size(); ++t)
    sum += (estimate[t].translation() - ground_truth[t].translation()).squaredNorm();
  return std::sqrt(sum / static_cast<double>(estimate.size()));
}

double nees(const Pose2d& estimate, const Pose2d& ground_truth,
            const Eigen::Ref<const Eigen::Matrix2d>& P) {
  Eigen::LLT<Eigen::Matrix2d> llt(0.5 * (P + P.transpose()));
  if (llt.info() != Eigen::Success) throw std::domain_error("nees: covariance is not positive definite");
  const Eigen::Vector2d e = ground_truth.translation() - estimate.translation();
  return e.dot(llt.solve(e));
}

std::vector<bool> failure_labels(std::span<const Pose2d> estimate,
                                 std::span<const Pose2d> ground_truth,
                                 const std::vector<Window>& windows, double epsilon) {
  if (estimate.size() != ground_truth.size())
    throw std::invalid_argument("failure_labels: pose counts differ");
  std::vector<bool> labels;
  labels.reserve(windows.size());
  for (const Window& w : windows) {
    double sum = 0.0;
    for (const VarKey& key : w.keys) {
      const std::size_t t = key.index;
      if (t >= estimate.size()) throw std::out_of_range("failure_labels: window beyond trajectory");
      sum += (estimate[t].translation() - ground_truth[t].translation()).norm();
    }
    labels.push_back(sum / static_cast<double>(w.keys.size()) > epsilon);
  }
  return labels;
}

PrecisionRecall precision_recall(const std::vector<bool>& triggered, const std::vector<bool>& failed) {
  if (triggered.size() != failed.size())
    throw std::invalid_argument("precision_recall: label lengths differ");
  PrecisionRecall pr;
  for (std::size_t i = 0; i < triggered.size(); ++i) {
    if (triggered[i] && failed[i]) ++pr.true_positives;
    if (triggered[i] && !failed[i]) ++pr.false_positives;
    if (!triggered[i] && failed[i]) ++pr.false_negatives;
  }
  if (pr.true_positives + pr.false_positives > 0)
    pr.precision = double(pr.true_positives) / (pr.true_positives + pr.false_positives);
  if (pr.true_positives + pr.false_negatives > 0)
    pr.recall = double(pr.true_positives) / (pr.true_positives + pr.false_negatives);
  return pr;
}

}  // namespace sngr
