#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "sngr/refine.hpp"
#include "sngr/scenario.hpp"
#include "sngr/solver.hpp"

using namespace sngr;

namespace {

/// Graph built from noise-free measurements of a scenario, plus a gauge
/// prior on x0 and weak landmark priors.
FactorGraph exact_graph(const ScenarioBundle& b) {
  FactorGraph g;
  g.add(PosePrior{pose_key(0), b.gt_poses[0], Eigen::Vector3d(0.05, 0.05, 0.01)});
  for (int t = 1; t < b.params.pose_count; ++t)
    g.add(Odometry{pose_key(t - 1), pose_key(t), between(b.gt_poses[t - 1], b.gt_poses[t]),
                   Eigen::Vector3d(0.05, 0.05, 0.01)});
  for (int t = 0; t < b.params.pose_count; ++t)
    for (int k = 0; k < b.params.landmark_count; ++k)
      g.add(Range{pose_key(t), landmark_key(k),
                  (b.gt_poses[t].translation() - b.gt_landmarks[k]).norm(), 0.1});
  return g;
}

Values ground_truth(const ScenarioBundle& b) {
  Values v;
  for (int t = 0; t < b.params.pose_count; ++t) v.insert(pose_key(t), b.gt_poses[t]);
  for (int k = 0; k < b.params.landmark_count; ++k) v.insert(landmark_key(k), b.gt_landmarks[k]);
  return v;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("linear system layout") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.seed = 1});
  const FactorGraph g = exact_graph(b);
  const Ordering ord(g);
  const LinearSystem sys = linearize(g, ground_truth(b), ord);
  int rows = 0;
  for (const Factor& f : g.factors()) rows += factor_dim(f);
  CHECK(sys.jacobian.rows() == rows);
  CHECK(sys.jacobian.cols() == 3 * 30 + 2 * 6);
  CHECK(sys.residual.size() == rows);
  CHECK(ord.offset(pose_key(0)) == 0);
  CHECK(ord.offset(landmark_key(0)) == 90);
  CHECK(sys.residual.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("information matrix equals the numerically differentiated one") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.p_noise = 0.2, .seed = 4});
  const SolverRun run = incremental_solve(b);
  const Ordering ord(run.graph);
  const Eigen::MatrixXd H(information_matrix(run.graph, run.estimate));
  const Eigen::MatrixXd Hn = oracle::numeric_information(run.graph, run.estimate, ord);
  CHECK(oracle::relative_error(H, Hn) < 1e-6);
}

TEST_CASE("exact measurements from ground truth stay at ground truth") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.seed = 2});
  const Values gt = ground_truth(b);
  const Values map = solve_map(exact_graph(b), gt);
  for (int t = 0; t < 30; ++t) {
    CHECK((map.pose(pose_key(t)).vector() - gt.pose(pose_key(t)).vector()).norm() < 1e-6);
  }
  for (int k = 0; k < 6; ++k) CHECK((map.landmark(landmark_key(k)) - gt.landmark(landmark_key(k))).norm() < 1e-6);
}

TEST_CASE("perturbed start converges back to the exact solution") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.seed = 3});
  const Values gt = ground_truth(b);
  Values start;
  Rng rng(7);
  for (int t = 0; t < 30; ++t)
    start.insert(pose_key(t), retract(b.gt_poses[t], Eigen::Vector3d(0.1 * rng.normal(),
                                                                      0.1 * rng.normal(),
                                                                      0.02 * rng.normal())));
  for (int k = 0; k < 6; ++k)
    start.insert(landmark_key(k), Point2d(b.gt_landmarks[k] + 0.2 * Point2d(rng.normal(), rng.normal())));
  const FactorGraph g = exact_graph(b);
  const SolveResult r = solve_map_detailed(g, start);
  CHECK(r.converged);
  CHECK(r.final_log_posterior >= r.initial_log_posterior);
  for (int t = 0; t < 30; ++t)
    CHECK((r.values.pose(pose_key(t)).translation() - b.gt_poses[t].translation()).norm() < 1e-6);
}

TEST_CASE("solve_map never lowers the log posterior") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const ScenarioBundle b = generate_scenario(ScenarioParams{.p_noise = 0.1 * (seed % 4), .seed = seed});
    const SolverRun run = incremental_solve(b);
    Values start;
    Rng rng(seed + 100);
    for (const auto& [key, value] : run.estimate) {
      if (key.is_pose())
        start.insert(key, retract(run.estimate.pose(key),
                                  Eigen::Vector3d(0.3 * rng.normal(), 0.3 * rng.normal(), 0.05 * rng.normal())));
      else
        start.insert(key, Point2d(run.estimate.landmark(key) + 0.5 * Point2d(rng.normal(), rng.normal())));
    }
    const SolveResult r = solve_map_detailed(run.graph, start);
    CHECK(r.final_log_posterior >= r.initial_log_posterior);
    CHECK(total_log_posterior(run.graph, r.values) == doctest::Approx(r.final_log_posterior));
  }
}

TEST_CASE("bimodal scenario stays on the saddle") {
  const BimodalScenario s = bimodal_scenario();
  const Values map = solve_map(s.graph, s.initial);
  const Point2d l = map.landmark(s.landmark);
  CHECK(std::abs(l.x() - 2.0) < 1e-6);
  CHECK(std::abs(l.y()) < 1e-6);
  CHECK_THROWS_AS(joint_marginal_covariance(s.graph, map, {s.landmark}), SingularSystem);
}

TEST_CASE("unconstrained variables are reported") {
  FactorGraph g;
  g.add(PosePrior{pose_key(0), Pose2d(), Eigen::Vector3d::Ones()});
  g.add_variable(landmark_key(4));
  Values v;
  v.insert(pose_key(0), Pose2d());
  v.insert(landmark_key(4), Point2d(1, 1));
  try {
    solve_map(g, v);
    FAIL("expected SingularSystem");
  } catch (const SingularSystem& e) {
    REQUIRE(e.keys().size() == 1);
    CHECK(e.keys()[0] == landmark_key(4));
  }

  // One range leaves a landmark free to slide around the circle.
  FactorGraph h;
  h.add(PosePrior{pose_key(0), Pose2d(), Eigen::Vector3d::Ones()});
  h.add(Range{pose_key(0), landmark_key(0), 2.0, 0.1});
  Values w = v;
  w.insert(landmark_key(0), Point2d(2, 0));
  try {
    joint_marginal_covariance(h, w, {pose_key(0)});
    FAIL("expected SingularSystem");
  } catch (const SingularSystem& e) {
    CHECK(std::find(e.keys().begin(), e.keys().end(), landmark_key(0)) != e.keys().end());
  }
}

TEST_CASE("prior-only graph marginal is the squared sigmas") {
  FactorGraph g;
  g.add(PosePrior{pose_key(0), Pose2d(1, 2, 0.3), Eigen::Vector3d(0.2, 0.5, 0.1)});
  Values v;
  v.insert(pose_key(0), Pose2d(1, 2, 0.3));
  const MarginalCov m = joint_marginal_covariance(g, v, {pose_key(0)});
  CHECK(oracle::relative_error(m.matrix, Eigen::Vector3d(0.04, 0.25, 0.01).asDiagonal().toDenseMatrix()) < 1e-12);
}

TEST_CASE("marginals match the dense inverse on 20 scenarios") {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ScenarioBundle b = generate_scenario(
        ScenarioParams{.p_noise = 0.1 * static_cast<double>(seed % 5), .seed = 1000 + seed});
    const SolverRun run = incremental_solve(b);
    std::vector<VarKey> keys;
    Rng rng(seed);
    const int start = 1 + static_cast<int>(rng.index(27));
    for (int t = start; t < start + 3; ++t) keys.push_back(pose_key(t));
    keys.push_back(landmark_key(static_cast<std::uint32_t>(rng.index(6))));
    keys.push_back(pose_key(0));
    const MarginalCov m = joint_marginal_covariance(run.graph, run.estimate, keys);
    const Eigen::MatrixXd ref = oracle::dense_inverse_block(run.graph, run.estimate, keys);
    const double err = (m.matrix - ref).norm() / ref.norm();
    worst = std::max(worst, err);

    CHECK((m.matrix - m.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * m.matrix.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m.matrix);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    CHECK(m.offset(keys[3]) == 9);
  }
  CHECK(worst < 1e-8);
}

}  // TEST_SUITE
