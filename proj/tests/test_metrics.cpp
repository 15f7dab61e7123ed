#include <doctest.h>

#include "oracles.hpp"
#include "sngr/metrics.hpp"

using namespace sngr;

TEST_SUITE("metrics") {

TEST_CASE("rmse examples") {
  std::vector<Pose2d> gt, est;
  for (int t = 0; t < 10; ++t) {
    gt.emplace_back(t, 0.5 * t, 0.1 * t);
    est.emplace_back(t + 0.3, 0.5 * t - 0.4, -0.2 * t);
  }
  CHECK(rmse(gt, gt) == 0.0);
  CHECK(rmse(est, gt) == doctest::Approx(0.5));
  CHECK_THROWS_AS(rmse(std::span(est).first(3), gt), std::invalid_argument);
}

TEST_CASE("rmse is translation equivariant") {
  Rng rng(31);
  std::vector<Pose2d> gt, est, gt2, est2;
  for (int t = 0; t < 20; ++t) {
    gt.push_back(oracle::random_pose(rng));
    est.push_back(oracle::random_pose(rng));
  }
  const Point2d shift(4.0, -7.0);
  for (int t = 0; t < 20; ++t) {
    gt2.emplace_back(gt[t].translation() + shift, gt[t].theta());
    est2.emplace_back(est[t].translation() + shift, est[t].theta());
  }
  CHECK(rmse(est2, gt2) == doctest::Approx(rmse(est, gt)).epsilon(1e-12));
}

TEST_CASE("nees examples") {
  const Eigen::Matrix2d P = 0.01 * Eigen::Matrix2d::Identity();
  CHECK(nees(Pose2d(0.1, 0, 0), Pose2d(0, 0, 0), P) == doctest::Approx(1.0));
  CHECK(nees(Pose2d(1, 1, 0), Pose2d(1, 1, 2), P) == 0.0);
  CHECK_THROWS_AS(nees(Pose2d(), Pose2d(), Eigen::Matrix2d::Zero()), std::domain_error);
}

TEST_CASE("nees is invariant under joint rotation") {
  Rng rng(32);
  for (int i = 0; i < 100; ++i) {
    Eigen::Matrix2d A;
    A << rng.normal(), rng.normal(), rng.normal(), rng.normal();
    const Eigen::Matrix2d P = A * A.transpose() + 0.01 * Eigen::Matrix2d::Identity();
    const Point2d e(rng.normal(), rng.normal());
    const Eigen::Matrix2d R = rotation2(6.0 * rng.uniform());
    const double a = nees(Pose2d(e, 0), Pose2d(), P);
    const double b = nees(Pose2d(R * e, 0), Pose2d(), R * P * R.transpose());
    CHECK(b == doctest::Approx(a).epsilon(1e-9));
  }
}

TEST_CASE("nees of a consistent estimator averages 2") {
  Rng rng(33);
  Eigen::Matrix2d P;
  P << 0.04, 0.01, 0.01, 0.02;
  const Eigen::Matrix2d L = P.llt().matrixL();
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const Point2d e = L * Point2d(rng.normal(), rng.normal());
    sum += nees(Pose2d(e, 0), Pose2d(), P);
  }
  // χ²₂ has variance 4, so the mean of n draws has sd 2/√n.
  CHECK(std::abs(sum / n - 2.0) < 4.0 * 2.0 / std::sqrt(n));
}

TEST_CASE("failure labels") {
  std::vector<Pose2d> gt(3), est(3);
  const auto windows = enumerate_windows(3, 3);
  CHECK(failure_labels(gt, gt, windows) == std::vector<bool>{false});
  for (auto& p : est) p = Pose2d(0.6, 0, 0);
  CHECK(failure_labels(est, gt, windows) == std::vector<bool>{true});
  est = {Pose2d(0.4, 0, 0), Pose2d(0, 0.4, 0), Pose2d(0.8, 0, 0)};
  CHECK(failure_labels(est, gt, windows) == std::vector<bool>{true});
  CHECK(failure_labels(est, gt, windows, 0.54) == std::vector<bool>{false});
}

TEST_CASE("precision and recall") {
  const PrecisionRecall same = precision_recall({true, false, true}, {true, false, true});
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);

  // Seed 0 at p = 0.3 in the trigger table: TP 14, FP 0, FN 12.
  std::vector<bool> trig(28, false), fail(28, false);
  for (int i = 0; i < 14; ++i) trig[i] = fail[i] = true;
  for (int i = 14; i < 26; ++i) fail[i] = true;
  const PrecisionRecall pr = precision_recall(trig, fail);
  CHECK(pr.precision == 1.0);
  CHECK(*pr.recall == doctest::Approx(0.538).epsilon(1e-3));

  const PrecisionRecall none = precision_recall({false, false}, {true, false});
  CHECK_FALSE(none.precision);
  CHECK(none.recall == 0.0);
  const PrecisionRecall empty = precision_recall({false}, {false});
  CHECK_FALSE(empty.precision);
  CHECK_FALSE(empty.recall);
  CHECK_THROWS_AS(precision_recall({true}, {true, false}), std::invalid_argument);
}

TEST_CASE("label inversion swaps the confusion table") {
  Rng rng(34);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<bool> t(28), f(28), nt(28), nf(28);
    for (int i = 0; i < 28; ++i) {
      t[i] = rng.uniform() < 0.5;
      f[i] = rng.uniform() < 0.5;
      nt[i] = !t[i];
      nf[i] = !f[i];
    }
    const PrecisionRecall a = precision_recall(t, f);
    const PrecisionRecall b = precision_recall(f, t);
    CHECK(a.true_positives == b.true_positives);
    CHECK(a.false_positives == b.false_negatives);
    CHECK(a.false_negatives == b.false_positives);
    // Inverting both labels exchanges true positives with true negatives.
    const PrecisionRecall c = precision_recall(nt, nf);
    const int tn = 28 - a.true_positives - a.false_positives - a.false_negatives;
    CHECK(c.true_positives == tn);
    CHECK(c.false_positives == a.false_negatives);
    CHECK(c.false_negatives == a.false_positives);
  }
}

}  // TEST_SUITE
