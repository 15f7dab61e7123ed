#include "sngr/graph.hpp"

#include <cmath>

namespace sngr {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const Eigen::Matrix2d kSkew = (Eigen::Matrix2d() << 0.0, -1.0, 1.0, 0.0).finished();

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string to_string(const VarKey& key) {
  return (key.is_pose() ? "x" : "l") + std::to_string(key.index);
}

void Values::insert(const VarKey& key, const Pose2d& pose) {
  if (!key.is_pose()) throw std::invalid_argument("pose value for landmark key " + to_string(key));
  entries_[key] = pose;
}

void Values::insert(const VarKey& key, const Point2d& point) {
  if (key.is_pose()) throw std::invalid_argument("point value for pose key " + to_string(key));
  entries_[key] = point;
}

const Pose2d& Values::pose(const VarKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || !key.is_pose()) throw MissingVariable(key);
  return std::get<Pose2d>(it->second);
}

const Point2d& Values::landmark(const VarKey& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || key.is_pose()) throw MissingVariable(key);
  return std::get<Point2d>(it->second);
}

int factor_dim(const Factor& factor) {
  return std::visit(Overloaded{[](const PosePrior&) { return 3; },
                               [](const LandmarkPrior&) { return 2; },
                               [](const Odometry&) { return 3; },
                               [](const Range&) { return 1; }},
                    factor);
}

std::vector<VarKey> factor_keys(const Factor& factor) {
  return std::visit(Overloaded{[](const PosePrior& f) { return std::vector<VarKey>{f.key}; },
                               [](const LandmarkPrior& f) { return std::vector<VarKey>{f.key}; },
                               [](const Odometry& f) { return std::vector<VarKey>{f.from, f.to}; },
                               [](const Range& f) {
                                 return std::vector<VarKey>{f.pose, f.landmark};
                               }},
                    factor);
}

RangeJacobians range_factor_jacobians(const Pose2d& pose, const Point2d& lm, double sigma) {
  const Eigen::Vector2d diff = pose.translation() - lm;
  const double dist = diff.norm();
  // Undefined at coincidence; the zero row keeps the system well formed.
  const Eigen::Vector2d n = dist > 0.0 ? Eigen::Vector2d(diff / dist) : Eigen::Vector2d::Zero();
  RangeJacobians J;
  J.d_pose << (n.transpose() * pose.rotation()) / sigma, 0.0;
  J.d_landmark = -n.transpose() / sigma;
  return J;
}

OdometryJacobians odometry_factor_jacobians(const Pose2d& a, const Pose2d& b, const Pose2d& u,
                                            const Eigen::Vector3d& sigma) {
  const Pose2d d = between(a, b);
  const Eigen::Matrix2d Ru_t = u.rotation().transpose();
  OdometryJacobians J;
  J.d_from.setZero();
  J.d_from.topLeftCorner<2, 2>() = -Ru_t;
  J.d_from.topRightCorner<2, 1>() = -Ru_t * kSkew * d.translation();
  J.d_from(2, 2) = -1.0;
  J.d_to.setZero();
  J.d_to.topLeftCorner<2, 2>() = Ru_t * a.rotation().transpose() * b.rotation();
  J.d_to(2, 2) = 1.0;
  const Eigen::Vector3d inv = sigma.cwiseInverse();
  J.d_from = inv.asDiagonal() * J.d_from;
  J.d_to = inv.asDiagonal() * J.d_to;
  return J;
}

Eigen::Matrix3d pose_prior_jacobian(const Pose2d& x, const Pose2d& mean,
                                    const Eigen::Vector3d& sigma) {
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
  J.topLeftCorner<2, 2>() = mean.rotation().transpose() * x.rotation();
  J(2, 2) = 1.0;
  return sigma.cwiseInverse().asDiagonal() * J;
}

Eigen::VectorXd whitened_error(const Factor& factor, const Values& values) {
  return std::visit(
      Overloaded{[&](const PosePrior& f) -> Eigen::VectorXd {
                   return pose_prior_error(values.pose(f.key), f.mean, f.sigma);
                 },
                 [&](const LandmarkPrior& f) -> Eigen::VectorXd {
                   return landmark_prior_error(values.landmark(f.key), f.mean,
                                               Point2d(f.sigma));
                 },
                 [&](const Odometry& f) -> Eigen::VectorXd {
                   return odometry_factor_error(values.pose(f.from), values.pose(f.to), f.delta,
                                                f.sigma);
                 },
                 [&](const Range& f) -> Eigen::VectorXd {
                   Eigen::VectorXd e(1);
                   e(0) = range_factor_error(values.pose(f.pose), values.landmark(f.landmark),
                                             f.z, f.sigma);
                   return e;
                 }},
      factor);
}

LinearizedFactor linearize(const Factor& factor, const Values& values) {
  LinearizedFactor out;
  out.error = whitened_error(factor, values);
  std::visit(Overloaded{[&](const PosePrior& f) {
                          out.blocks.emplace_back(
                              f.key, pose_prior_jacobian(values.pose(f.key), f.mean, f.sigma));
                        },
                        [&](const LandmarkPrior& f) {
                          Eigen::Matrix2d J = f.sigma.cwiseInverse().asDiagonal();
                          out.blocks.emplace_back(f.key, J);
                        },
                        [&](const Odometry& f) {
                          const auto J = odometry_factor_jacobians(
                              values.pose(f.from), values.pose(f.to), f.delta, f.sigma);
                          out.blocks.emplace_back(f.from, J.d_from);
                          out.blocks.emplace_back(f.to, J.d_to);
                        },
                        [&](const Range& f) {
                          const auto J = range_factor_jacobians(
                              values.pose(f.pose), values.landmark(f.landmark), f.sigma);
                          out.blocks.emplace_back(f.pose, J.d_pose);
                          out.blocks.emplace_back(f.landmark, J.d_landmark);
                        }},
             factor);
  return out;
}

std::size_t FactorGraph::add(Factor factor) {
  std::visit(
      Overloaded{[](const PosePrior& f) {
                   if (!f.key.is_pose()) throw std::invalid_argument("pose prior on landmark key");
                   if (!(f.sigma.array() > 0.0).all() || !f.sigma.allFinite())
                     throw std::invalid_argument("pose prior sigma must be positive");
                 },
                 [](const LandmarkPrior& f) {
                   if (f.key.is_pose()) throw std::invalid_argument("landmark prior on pose key");
                   if (!(f.sigma.array() > 0.0).all() || !f.sigma.allFinite())
                     throw std::invalid_argument("landmark prior sigma must be positive");
                 },
                 [](const Odometry& f) {
                   if (!f.from.is_pose() || !f.to.is_pose() || f.to.index != f.from.index + 1)
                     throw std::invalid_argument("odometry must link consecutive poses, got " +
                                                 to_string(f.from) + "->" + to_string(f.to));
                   if (!(f.sigma.array() > 0.0).all() || !f.sigma.allFinite())
                     throw std::invalid_argument("odometry sigma must be positive");
                 },
                 [](const Range& f) {
                   if (!f.pose.is_pose() || f.landmark.is_pose())
                     throw std::invalid_argument("range factor must link a pose and a landmark");
                   if (!positive_finite(f.sigma))
                     throw std::invalid_argument("range sigma must be positive");
                 }},
      factor);
  for (const VarKey& key : factor_keys(factor)) variables_.insert(key);
  if (const auto* r = std::get_if<Range>(&factor)) ++range_counts_[r->landmark];
  factors_.push_back(std::move(factor));
  return factors_.size() - 1;
}

std::size_t FactorGraph::range_count(const VarKey& landmark) const {
  auto it = range_counts_.find(landmark);
  return it == range_counts_.end() ? 0 : it->second;
}

double log_likelihood(std::span<const Factor> factors, const Values& values) {
  double sum = 0.0;
  for (const Factor& f : factors) sum += whitened_error(f, values).squaredNorm();
  return -0.5 * sum;
}

double total_log_posterior(const FactorGraph& graph, const Values& values) {
  return log_likelihood(graph.factors(), values);
}

}  // namespace sngr
