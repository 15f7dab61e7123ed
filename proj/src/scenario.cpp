#include "sngr/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sngr {

void ScenarioParams::validate() const {
  if (pose_count < 1) throw std::invalid_argument("scenario needs at least one pose");
  if (landmark_count < 1) throw std::invalid_argument("scenario needs at least one landmark");
  if (!(p_noise >= 0.0 && p_noise <= 1.0)) throw std::invalid_argument("p_noise must lie in [0, 1]");
  if (!(radius > 0.0 && landmark_box > 0.0 && sigma_t > 0.0 && sigma_rot > 0.0 && sigma_range > 0.0))
    throw std::invalid_argument("scenario scales and noise levels must be positive");
}

std::vector<RangeMeasurement> inject_wrong_association(std::vector<RangeMeasurement> ranges,
                                                       double p_noise, int landmark_count,
                                                       Rng& rng) {
  if (p_noise > 0.0 && landmark_count < 2)
    throw std::invalid_argument("wrong association needs at least two landmarks");
  if (p_noise <= 0.0) return ranges;
  for (RangeMeasurement& m : ranges) {
    if (rng.uniform() >= p_noise) continue;
    int other = static_cast<int>(rng.index(static_cast<std::uint64_t>(landmark_count - 1)));
    if (other >= m.true_k) ++other;
    m.reported_k = other;
  }
  return ranges;
}

ScenarioBundle generate_scenario(const ScenarioParams& params) {
  params.validate();
  ScenarioBundle b;
  b.params = params;
  Rng rng(params.seed);

  const int T = params.pose_count;
  const int K = params.landmark_count;
  for (int t = 0; t < T; ++t) {
    const double phi = 2.0 * std::numbers::pi * t / T;
    b.gt_poses.emplace_back(params.radius * std::cos(phi), params.radius * std::sin(phi),
                            phi + 0.5 * std::numbers::pi);
  }
  for (int k = 0; k < K; ++k) {
    const double x = (2.0 * rng.uniform() - 1.0) * params.landmark_box;
    const double y = (2.0 * rng.uniform() - 1.0) * params.landmark_box;
    b.gt_landmarks.emplace_back(x, y);
  }
  for (int t = 1; t < T; ++t) {
    const Pose2d step = between(b.gt_poses[t - 1], b.gt_poses[t]);
    const double dx = params.sigma_t * rng.normal();
    const double dy = params.sigma_t * rng.normal();
    const double dth = params.sigma_rot * rng.normal();
    b.odometry.emplace_back(step.x() + dx, step.y() + dy, step.theta() + dth);
  }
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < K; ++k) {
      const double d = (b.gt_poses[t].translation() - b.gt_landmarks[k]).norm();
      b.ranges.push_back({t, k, k, d + params.sigma_range * rng.normal()});
    }
  }
  b.ranges = inject_wrong_association(std::move(b.ranges), params.p_noise, K, rng);
  return b;
}

std::pair<Point2d, Point2d> BimodalScenario::modes() const {
  const Point2d mid = 0.5 * (anchor_a + anchor_b);
  const Point2d axis = (anchor_b - anchor_a).normalized();
  const double half = 0.5 * (anchor_b - anchor_a).norm();
  const double h = std::sqrt(range * range - half * half);
  const Point2d normal(-axis.y(), axis.x());
  return {mid + h * normal, mid - h * normal};
}

BimodalScenario bimodal_scenario() {
  BimodalScenario s;
  s.anchor_a = Point2d(0.0, 0.0);
  s.anchor_b = Point2d(4.0, 0.0);
  s.range = 3.0;
  s.sigma_range = std::sqrt(0.08);
  s.landmark = landmark_key(0);

  const VarKey a = pose_key(0);
  const VarKey b = pose_key(1);
  const Eigen::Vector3d tight = Eigen::Vector3d::Constant(kAnchorSigma);
  s.graph.add(PosePrior{a, Pose2d(s.anchor_a, 0.0), tight});
  s.graph.add(PosePrior{b, Pose2d(s.anchor_b, 0.0), tight});
  s.graph.add(Range{a, s.landmark, s.range, s.sigma_range});
  s.graph.add(Range{b, s.landmark, s.range, s.sigma_range});

  s.initial.insert(a, Pose2d(s.anchor_a, 0.0));
  s.initial.insert(b, Pose2d(s.anchor_b, 0.0));
  s.initial.insert(s.landmark, Point2d(2.0, 0.0));
  return s;
}

}  // namespace sngr
