#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sngr/geom.hpp"
#include "sngr/trigger.hpp"

namespace sngr {

/// Planar-position RMSE; headings are ignored.
double rmse(std::span<const Pose2d> estimate, std::span<const Pose2d> ground_truth);

/// Squared Mahalanobis position error under the 2x2 covariance P.
double nees(const Pose2d& estimate, const Pose2d& ground_truth,
            const Eigen::Ref<const Eigen::Matrix2d>& P);

/// Window failure: mean planar error over the window's poses exceeds epsilon.
std::vector<bool> failure_labels(std::span<const Pose2d> estimate,
                                 std::span<const Pose2d> ground_truth,
                                 const std::vector<Window>& windows, double epsilon = 0.5);

/// Either side is absent when its denominator is zero.
struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
};

PrecisionRecall precision_recall(const std::vector<bool>& triggered, const std::vector<bool>& failed);

}  // namespace sngr
