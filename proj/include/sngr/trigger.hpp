#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sngr/graph.hpp"

namespace sngr {

/// W consecutive poses {x_start, ..., x_start+W-1}.
struct Window {
  int start = 0;
  std::vector<VarKey> keys;

  int size() const { return static_cast<int>(keys.size()); }
};

/// All T-W+1 windows in increasing start order.
std::vector<Window> enumerate_windows(int pose_count, int window_size = 3);

/// log10(λmax / λmin) of the symmetrized covariance.
double window_score(const Eigen::Ref<const Eigen::MatrixXd>& cov);

inline bool exceeds(double score, double tau) { return score > tau; }

struct WindowScore {
  Window window;
  double score = 0.0;
  bool triggered = false;
};

struct Calibration {
  double tau = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
};

/// Picks τ on a 0.01 grid: no clean score may exceed it; among those, the
/// value with the highest recall on the labelled noisy scores, ties going
/// to the larger τ.
Calibration calibrate_tau(std::span<const double> clean_scores,
                          std::span<const double> noisy_scores,
                          const std::vector<bool>& noisy_labels);

}  // namespace sngr
