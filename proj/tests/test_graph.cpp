#include <doctest.h>

#include <algorithm>
#include <numbers>

#include "oracles.hpp"
#include "sngr/graph.hpp"
#include "sngr/scenario.hpp"

using namespace sngr;

namespace {

Eigen::Vector3d random_sigma3(Rng& rng) {
  return Eigen::Vector3d(0.01 + rng.uniform(), 0.01 + rng.uniform(), 0.005 + 0.2 * rng.uniform());
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("range factor examples") {
  const Pose2d origin(0, 0, 0);
  const Point2d lm(3, 4);
  CHECK(range_factor_error(origin, lm, 5.0, 0.1) == doctest::Approx(0.0));
  CHECK(range_factor_error(origin, lm, 5.5, 0.1) == doctest::Approx(-5.0));

  const auto J = range_factor_jacobians(origin, lm, 0.1);
  std::function<Eigen::VectorXd(const Point2d&)> f = [&](const Point2d& l) {
    Eigen::VectorXd e(1);
    e(0) = range_factor_error(origin, l, 5.0, 0.1);
    return e;
  };
  const Eigen::MatrixXd fd = oracle::central_jacobian<Point2d>(f, lm, 2, oracle::nudge_point);
  // Moving the landmark away lengthens the range: +(0.6, 0.8)/σ.
  CHECK(fd(0, 0) == doctest::Approx(6.0).epsilon(1e-6));
  CHECK(fd(0, 1) == doctest::Approx(8.0).epsilon(1e-6));
  CHECK(oracle::relative_error(J.d_landmark, fd) < 1e-6);
}

TEST_CASE("odometry factor examples") {
  const Pose2d a(1.0, -2.0, 0.4), u(0.5, 0.1, -0.2);
  const Eigen::Vector3d sigma(0.05, 0.05, 0.01);
  CHECK(odometry_factor_error(a, compose(a, u), u, sigma).norm() < 1e-12);

  const Pose2d b = compose(a, u);
  const Pose2d u_wrapped(u.x(), u.y(), u.theta() + 2 * std::numbers::pi);
  CHECK(std::abs(odometry_factor_error(a, b, u_wrapped, sigma)(2)) < 1e-9);
  CHECK(std::abs(odometry_factor_error(Pose2d(0, 0, 3.1), Pose2d(0, 0, -3.1), Pose2d(0, 0, 0),
                                       Eigen::Vector3d(Eigen::Vector3d::Ones()))(2) -
                 (2 * std::numbers::pi - 6.2)) < 1e-12);
}

TEST_CASE("analytic jacobians match central differences on 100 random configurations") {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Pose2d a = oracle::random_pose(rng), b = oracle::random_pose(rng),
                 u = oracle::random_pose(rng, 1.0), mean = oracle::random_pose(rng);
    const Point2d l = oracle::random_point(rng), lmean = oracle::random_point(rng);
    const Eigen::Vector3d s3 = random_sigma3(rng);
    const Eigen::Vector2d s2(0.1 + rng.uniform(), 0.1 + rng.uniform());
    const double sr = 0.05 + rng.uniform();
    const double z = 5.0 * rng.uniform();

    using PoseFn = std::function<Eigen::VectorXd(const Pose2d&)>;
    using PointFn = std::function<Eigen::VectorXd(const Point2d&)>;

    const auto Jr = range_factor_jacobians(a, l, sr);
    PoseFn rp = [&](const Pose2d& p) {
      return Eigen::VectorXd::Constant(1, range_factor_error(p, l, z, sr));
    };
    PointFn rl = [&](const Point2d& q) {
      return Eigen::VectorXd::Constant(1, range_factor_error(a, q, z, sr));
    };
    worst = std::max(worst, oracle::relative_error(
                                Jr.d_pose, oracle::central_jacobian<Pose2d>(rp, a, 3, oracle::nudge_pose)));
    worst = std::max(worst, oracle::relative_error(
                                Jr.d_landmark, oracle::central_jacobian<Point2d>(rl, l, 2, oracle::nudge_point)));

    const auto Jo = odometry_factor_jacobians(a, b, u, s3);
    PoseFn of = [&](const Pose2d& p) -> Eigen::VectorXd { return odometry_factor_error(p, b, u, s3); };
    PoseFn ot = [&](const Pose2d& p) -> Eigen::VectorXd { return odometry_factor_error(a, p, u, s3); };
    worst = std::max(worst, oracle::relative_error(
                                Jo.d_from, oracle::central_jacobian<Pose2d>(of, a, 3, oracle::nudge_pose)));
    worst = std::max(worst, oracle::relative_error(
                                Jo.d_to, oracle::central_jacobian<Pose2d>(ot, b, 3, oracle::nudge_pose)));

    PoseFn pp = [&](const Pose2d& p) -> Eigen::VectorXd { return pose_prior_error(p, mean, s3); };
    worst = std::max(worst, oracle::relative_error(
                                pose_prior_jacobian(a, mean, s3),
                                oracle::central_jacobian<Pose2d>(pp, a, 3, oracle::nudge_pose)));

    Values v;
    v.insert(landmark_key(0), l);
    const LinearizedFactor lp = linearize(LandmarkPrior{landmark_key(0), lmean, s2}, v);
    PointFn lf = [&](const Point2d& q) -> Eigen::VectorXd {
      return landmark_prior_error(q, lmean, Point2d(s2));
    };
    worst = std::max(worst, oracle::relative_error(
                                lp.blocks[0].second,
                                oracle::central_jacobian<Point2d>(lf, l, 2, oracle::nudge_point)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("linearize returns blocks in factor_keys order") {
  Values v;
  v.insert(pose_key(0), Pose2d(0, 0, 0));
  v.insert(pose_key(1), Pose2d(1, 0, 0.1));
  v.insert(landmark_key(0), Point2d(2, 2));
  const Factor odo = Odometry{pose_key(0), pose_key(1), Pose2d(1, 0, 0), Eigen::Vector3d::Ones()};
  const Factor rng = Range{pose_key(1), landmark_key(0), 2.0, 0.1};
  for (const Factor& f : {odo, rng}) {
    const LinearizedFactor lf = linearize(f, v);
    const auto keys = factor_keys(f);
    REQUIRE(lf.blocks.size() == keys.size());
    for (std::size_t i = 0; i < keys.size(); ++i) {
      CHECK(lf.blocks[i].first == keys[i]);
      CHECK(lf.blocks[i].second.rows() == factor_dim(f));
      CHECK(lf.blocks[i].second.cols() == keys[i].tangent_dim());
    }
  }
}

TEST_CASE("factor validation") {
  FactorGraph g;
  CHECK_THROWS_AS(g.add(Odometry{pose_key(0), pose_key(2), Pose2d(), Eigen::Vector3d::Ones()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(g.add(Range{landmark_key(0), landmark_key(1), 1.0, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(g.add(Range{pose_key(0), landmark_key(1), 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(g.add(PosePrior{pose_key(0), Pose2d(), Eigen::Vector3d(1, -1, 1)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(g.add(LandmarkPrior{pose_key(0), Point2d(0, 0), Eigen::Vector2d::Ones()}),
                  std::invalid_argument);
  CHECK(g.size() == 0);
  g.add(Range{pose_key(0), landmark_key(1), 1.0, 0.1});
  g.add(Range{pose_key(1), landmark_key(1), 1.0, 0.1});
  CHECK(g.range_count(landmark_key(1)) == 2);
  CHECK(g.range_count(landmark_key(0)) == 0);
  CHECK(g.variables().size() == 3);
}

TEST_CASE("log posterior examples") {
  FactorGraph g;
  Values v;
  v.insert(pose_key(0), Pose2d(0, 0, 0));
  v.insert(landmark_key(0), Point2d(3, 4));
  g.add(Range{pose_key(0), landmark_key(0), 5.0, 0.1});
  CHECK(total_log_posterior(g, v) == 0.0);
  g.add(Range{pose_key(0), landmark_key(0), 5.5, 0.1});
  CHECK(total_log_posterior(g, v) == doctest::Approx(-12.5));
}

TEST_CASE("missing variables are reported by key") {
  FactorGraph g;
  g.add(Range{pose_key(3), landmark_key(2), 1.0, 0.1});
  Values v;
  v.insert(pose_key(3), Pose2d());
  try {
    total_log_posterior(g, v);
    FAIL("expected MissingVariable");
  } catch (const MissingVariable& e) {
    CHECK(e.key() == landmark_key(2));
    CHECK(std::string(e.what()).find("l2") != std::string::npos);
  }
  CHECK_THROWS_AS(v.insert(pose_key(1), Point2d(0, 0)), std::invalid_argument);
}

TEST_CASE("bimodal saddle sits 12.50 nats below the modes") {
  const BimodalScenario s = bimodal_scenario();
  CHECK(total_log_posterior(s.graph, s.initial) == doctest::Approx(-12.50).epsilon(1e-6));
  const auto [upper, lower] = s.modes();
  for (const Point2d& m : {upper, lower}) {
    Values v = s.initial;
    v.insert(s.landmark, m);
    CHECK(std::abs(total_log_posterior(s.graph, v)) < 1e-12);
  }
  // The best sample reported for this experiment, (1.984, -2.232), scores within 0.01 nats of 0.
  Values v = s.initial;
  v.insert(s.landmark, Point2d(1.984, -2.232));
  const double ll = total_log_posterior(s.graph, v);
  CHECK(ll <= 0.0);
  CHECK(ll >= -0.01);
}

TEST_CASE("total log posterior is invariant under factor reordering") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.p_noise = 0.2, .seed = 5});
  std::vector<Factor> factors;
  Values v;
  for (int t = 0; t < b.params.pose_count; ++t) v.insert(pose_key(t), b.gt_poses[t]);
  for (int k = 0; k < b.params.landmark_count; ++k)
    v.insert(landmark_key(k), Point2d(b.gt_landmarks[k] + Point2d(0.1, -0.2)));
  for (int t = 1; t < b.params.pose_count; ++t)
    factors.push_back(Odometry{pose_key(t - 1), pose_key(t), b.odometry[t - 1],
                               Eigen::Vector3d(0.05, 0.05, 0.01)});
  for (const RangeMeasurement& m : b.ranges)
    factors.push_back(Range{pose_key(m.t), landmark_key(m.reported_k), m.z, 0.1});
  const double base = log_likelihood(factors, v);
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    for (std::size_t i = factors.size() - 1; i > 0; --i)
      std::swap(factors[i], factors[rng.index(i + 1)]);
    CHECK(log_likelihood(factors, v) == doctest::Approx(base).epsilon(1e-12));
  }
}

}  // TEST_SUITE
