#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace sngr {

template <typename Scalar>
using Point2 = Eigen::Matrix<Scalar, 2, 1>;
using Point2d = Point2<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  using std::remainder;
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  Scalar r = remainder(theta, Scalar(2) * kPi);
  if (r <= -kPi) r += Scalar(2) * kPi;
  return r;
}

template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> rotation2(Scalar theta) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, 2, 2> R;
  R << cos(theta), -sin(theta), sin(theta), cos(theta);
  return R;
}

/// Planar rigid-body pose. The heading is kept wrapped into (-pi, pi].
template <typename Scalar>
class Pose2 {
 public:
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

  Pose2() = default;
  Pose2(Scalar x, Scalar y, Scalar theta) : x_(x), y_(y), theta_(wrap_angle(theta)) {}
  Pose2(const Point2<Scalar>& t, Scalar theta) : Pose2(t.x(), t.y(), theta) {}

  static Pose2 from_vector(const Vector3& v) { return Pose2(v(0), v(1), v(2)); }

  Scalar x() const { return x_; }
  Scalar y() const { return y_; }
  Scalar theta() const { return theta_; }

  Point2<Scalar> translation() const { return Point2<Scalar>(x_, y_); }
  Eigen::Matrix<Scalar, 2, 2> rotation() const { return rotation2(theta_); }
  Vector3 vector() const { return Vector3(x_, y_, theta_); }

  template <typename Other>
  Pose2<Other> cast() const {
    return Pose2<Other>(Other(x_), Other(y_), Other(theta_));
  }

  friend bool operator==(const Pose2&, const Pose2&) = default;

 private:
  Scalar x_{0};
  Scalar y_{0};
  Scalar theta_{0};
};

using Pose2d = Pose2<double>;

/// a ⊕ b: b expressed in a's frame, mapped to the world.
template <typename Scalar>
Pose2<Scalar> compose(const Pose2<Scalar>& a, const Pose2<Scalar>& b) {
  const Point2<Scalar> t = a.translation() + a.rotation() * b.translation();
  return Pose2<Scalar>(t, a.theta() + b.theta());
}

template <typename Scalar>
Pose2<Scalar> inverse(const Pose2<Scalar>& a) {
  const Point2<Scalar> t = -(a.rotation().transpose() * a.translation());
  return Pose2<Scalar>(t, -a.theta());
}

/// The unique d with a ⊕ d = b.
template <typename Scalar>
Pose2<Scalar> between(const Pose2<Scalar>& a, const Pose2<Scalar>& b) {
  const Point2<Scalar> t = a.rotation().transpose() * (b.translation() - a.translation());
  return Pose2<Scalar>(t, b.theta() - a.theta());
}

/// Retraction used by the solver and the sampler: pose ⊕ (dx, dy, dtheta).
template <typename Scalar>
Pose2<Scalar> retract(const Pose2<Scalar>& pose, const Eigen::Matrix<Scalar, 3, 1>& delta) {
  return compose(pose, Pose2<Scalar>::from_vector(delta));
}

/// Inverse of retract: local coordinates of b around a.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> local(const Pose2<Scalar>& a, const Pose2<Scalar>& b) {
  return between(a, b).vector();
}

}  // namespace sngr
