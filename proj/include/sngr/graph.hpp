#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "sngr/geom.hpp"

namespace sngr {

enum class VarKind : std::uint8_t { Pose = 0, Landmark = 1 };

/// Variable identifier. Orders poses before landmarks, then by index.
struct VarKey {
  VarKind kind = VarKind::Pose;
  std::uint32_t index = 0;

  friend auto operator<=>(const VarKey&, const VarKey&) = default;

  bool is_pose() const { return kind == VarKind::Pose; }
  int tangent_dim() const { return is_pose() ? 3 : 2; }
};

inline VarKey pose_key(std::uint32_t i) { return {VarKind::Pose, i}; }
inline VarKey landmark_key(std::uint32_t i) { return {VarKind::Landmark, i}; }

std::string to_string(const VarKey& key);

class MissingVariable : public std::out_of_range {
 public:
  explicit MissingVariable(const VarKey& key)
      : std::out_of_range("missing variable " + to_string(key)), key_(key) {}
  const VarKey& key() const { return key_; }

 private:
  VarKey key_;
};

/// Assignment of poses and landmarks.
class Values {
 public:
  using Entry = std::variant<Pose2d, Point2d>;

  void insert(const VarKey& key, const Pose2d& pose);
  void insert(const VarKey& key, const Point2d& point);

  bool contains(const VarKey& key) const { return entries_.count(key) != 0; }
  const Pose2d& pose(const VarKey& key) const;
  const Point2d& landmark(const VarKey& key) const;
  std::size_t size() const { return entries_.size(); }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::map<VarKey, Entry> entries_;
};

// Factor kinds. Noise is given as diagonal standard deviations.

struct PosePrior {
  VarKey key;
  Pose2d mean;
  Eigen::Vector3d sigma;
};

struct LandmarkPrior {
  VarKey key;
  Point2d mean;
  Eigen::Vector2d sigma;
};

struct Odometry {
  VarKey from;
  VarKey to;
  Pose2d delta;
  Eigen::Vector3d sigma;
};

struct Range {
  VarKey pose;
  VarKey landmark;
  double z = 0.0;
  double sigma = 1.0;
};

using Factor = std::variant<PosePrior, LandmarkPrior, Odometry, Range>;

int factor_dim(const Factor& factor);
std::vector<VarKey> factor_keys(const Factor& factor);

// Whitened errors. Sign convention is predicted minus measured.

template <typename Scalar>
Scalar range_factor_error(const Pose2<Scalar>& pose, const Point2<Scalar>& lm, Scalar z,
                          Scalar sigma) {
  return ((pose.translation() - lm).norm() - z) / sigma;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> odometry_factor_error(const Pose2<Scalar>& a, const Pose2<Scalar>& b,
                                                  const Pose2<Scalar>& u,
                                                  const Eigen::Matrix<Scalar, 3, 1>& sigma) {
  return local(u, between(a, b)).cwiseQuotient(sigma);
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> pose_prior_error(const Pose2<Scalar>& x, const Pose2<Scalar>& mean,
                                             const Eigen::Matrix<Scalar, 3, 1>& sigma) {
  return local(mean, x).cwiseQuotient(sigma);
}

template <typename Scalar>
Point2<Scalar> landmark_prior_error(const Point2<Scalar>& l, const Point2<Scalar>& mean,
                                    const Point2<Scalar>& sigma) {
  return (l - mean).cwiseQuotient(sigma);
}

// Analytic Jacobians with respect to the retraction (pose ⊕ delta for poses,
// additive for landmarks).

struct RangeJacobians {
  Eigen::RowVector3d d_pose;
  Eigen::RowVector2d d_landmark;
};
RangeJacobians range_factor_jacobians(const Pose2d& pose, const Point2d& lm, double sigma);

struct OdometryJacobians {
  Eigen::Matrix3d d_from;
  Eigen::Matrix3d d_to;
};
OdometryJacobians odometry_factor_jacobians(const Pose2d& a, const Pose2d& b, const Pose2d& u,
                                            const Eigen::Vector3d& sigma);

Eigen::Matrix3d pose_prior_jacobian(const Pose2d& x, const Pose2d& mean,
                                    const Eigen::Vector3d& sigma);

/// Whitened error of any factor kind.
Eigen::VectorXd whitened_error(const Factor& factor, const Values& values);

/// Whitened error and per-variable Jacobian blocks, in factor_keys order.
struct LinearizedFactor {
  Eigen::VectorXd error;
  std::vector<std::pair<VarKey, Eigen::MatrixXd>> blocks;
};
LinearizedFactor linearize(const Factor& factor, const Values& values);

class FactorGraph {
 public:
  /// Registers a variable without attaching any factor to it.
  void add_variable(const VarKey& key) { variables_.insert(key); }

  /// Validates and appends a factor; returns its index.
  std::size_t add(Factor factor);

  const std::vector<Factor>& factors() const { return factors_; }
  const std::set<VarKey>& variables() const { return variables_; }
  std::size_t size() const { return factors_.size(); }

  /// Number of range factors attached to a landmark.
  std::size_t range_count(const VarKey& landmark) const;

 private:
  std::vector<Factor> factors_;
  std::set<VarKey> variables_;
  std::map<VarKey, std::size_t> range_counts_;
};

/// Sum of squared whitened errors over a factor set, scaled by -1/2.
/// Gaussian normalization constants are omitted.
double log_likelihood(std::span<const Factor> factors, const Values& values);

double total_log_posterior(const FactorGraph& graph, const Values& values);

}  // namespace sngr
