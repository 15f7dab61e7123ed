#pragma once

#include <cstdint>
#include <vector>

#include "sngr/geom.hpp"
#include "sngr/graph.hpp"
#include "sngr/rng.hpp"

namespace sngr {

struct ScenarioParams {
  int pose_count = 30;
  double radius = 5.0;
  int landmark_count = 6;
  double landmark_box = 4.0;  ///< landmarks uniform in [-box, box]²
  double sigma_t = 0.05;
  double sigma_rot = 0.01;
  double sigma_range = 0.1;
  double p_noise = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RangeMeasurement {
  int t = 0;
  int reported_k = 0;
  int true_k = 0;
  double z = 0.0;

  bool corrupted() const { return reported_k != true_k; }
  friend bool operator==(const RangeMeasurement&, const RangeMeasurement&) = default;
};

struct ScenarioBundle {
  ScenarioParams params;
  std::vector<Pose2d> gt_poses;
  std::vector<Point2d> gt_landmarks;
  /// odometry[t-1] is the noisy increment from pose t-1 to pose t.
  std::vector<Pose2d> odometry;
  /// Pose-major: every pose observes every landmark.
  std::vector<RangeMeasurement> ranges;
};

/// Draw order: landmarks, odometry noise per step, range noise per
/// measurement, then association corruption.
ScenarioBundle generate_scenario(const ScenarioParams& params);

/// Reassigns each entry's reported landmark with probability p_noise to a
/// uniformly chosen other landmark. Range values are left untouched.
std::vector<RangeMeasurement> inject_wrong_association(std::vector<RangeMeasurement> ranges,
                                                       double p_noise, int landmark_count,
                                                       Rng& rng);

/// Two anchors at (0,0) and (4,0) ranging a single landmark at 3 m.
struct BimodalScenario {
  FactorGraph graph;
  Values initial;
  VarKey landmark;
  Point2d anchor_a;
  Point2d anchor_b;
  double range = 3.0;
  double sigma_range = 0.0;

  /// The two points on both range circles.
  std::pair<Point2d, Point2d> modes() const;
};

/// Range noise chosen so each range factor contributes -6.25 nats at the
/// midpoint (2, 0): σ = sqrt(0.08) ≈ 0.2828 m.
BimodalScenario bimodal_scenario();

inline constexpr double kAnchorSigma = 1e-6;

}  // namespace sngr
