#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "sngr/scenario.hpp"

using namespace sngr;

namespace {

int corrupted_count(const ScenarioBundle& b) {
  int n = 0;
  for (const RangeMeasurement& m : b.ranges) n += m.corrupted();
  return n;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("default scenario sizes and ordering") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{});
  CHECK(b.gt_poses.size() == 30);
  CHECK(b.gt_landmarks.size() == 6);
  CHECK(b.odometry.size() == 29);
  REQUIRE(b.ranges.size() == 180);
  for (std::size_t i = 0; i < b.ranges.size(); ++i) {
    CHECK(b.ranges[i].t == static_cast<int>(i / 6));
    CHECK(b.ranges[i].true_k == static_cast<int>(i % 6));
  }
  for (const Point2d& l : b.gt_landmarks) CHECK(l.cwiseAbs().maxCoeff() <= 4.0);
}

TEST_CASE("trajectory is a circle of radius 5 with tangent headings") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.seed = 8});
  for (int t = 0; t < 30; ++t) {
    const Pose2d& p = b.gt_poses[t];
    CHECK(p.translation().norm() == doctest::Approx(5.0).epsilon(1e-12));
    const Point2d tangent(-p.y(), p.x());
    CHECK(std::abs(wrap_angle(p.theta() - std::atan2(tangent.y(), tangent.x()))) < 1e-12);
  }
}

TEST_CASE("clean data keeps every association") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ScenarioBundle b = generate_scenario(ScenarioParams{.seed = seed});
    CHECK(corrupted_count(b) == 0);
  }
}

TEST_CASE("p = 1 corrupts every association") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.p_noise = 1.0, .seed = 3});
  for (const RangeMeasurement& m : b.ranges) {
    CHECK(m.corrupted());
    CHECK(m.reported_k >= 0);
    CHECK(m.reported_k < 6);
  }
}

TEST_CASE("corruption leaves geometry and range values unchanged") {
  const ScenarioBundle clean = generate_scenario(ScenarioParams{.seed = 4});
  const ScenarioBundle noisy = generate_scenario(ScenarioParams{.p_noise = 0.3, .seed = 4});
  CHECK(clean.gt_landmarks == noisy.gt_landmarks);
  CHECK(clean.odometry == noisy.odometry);
  for (std::size_t i = 0; i < clean.ranges.size(); ++i) {
    CHECK(clean.ranges[i].z == noisy.ranges[i].z);
    CHECK(clean.ranges[i].true_k == noisy.ranges[i].true_k);
  }
}

TEST_CASE("corrupted counts follow Binomial(180, 0.3)") {
  // Mean 54, sd √37.8 ≈ 6.15; each seed within 3.29 sd (two-sided 99.9%).
  int total = 0;
  const int seeds = 40;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const int n = corrupted_count(generate_scenario(ScenarioParams{.p_noise = 0.3, .seed = seed}));
    CHECK(n >= 34);
    CHECK(n <= 74);
    total += n;
  }
  const double rate = static_cast<double>(total) / (180.0 * seeds);
  CHECK(std::abs(rate - 0.3) < 4.0 * std::sqrt(0.21 / (180.0 * seeds)));
}

TEST_CASE("injection rate and reassignment targets over 1e4 entries") {
  std::vector<RangeMeasurement> base;
  for (int i = 0; i < 10000; ++i) base.push_back({i / 6, i % 6, i % 6, 1.0});
  Rng rng(51);
  const auto out = inject_wrong_association(base, 0.2, 6, rng);
  int n = 0;
  std::array<int, 5> offsets{};
  for (const RangeMeasurement& m : out) {
    if (!m.corrupted()) continue;
    ++n;
    offsets[static_cast<std::size_t>((m.reported_k - m.true_k + 6) % 6 - 1)]++;
  }
  CHECK(std::abs(n / 1e4 - 0.2) < 0.02);
  for (int c : offsets) CHECK(std::abs(c / static_cast<double>(n) - 0.2) < 0.05);
}

TEST_CASE("generation is deterministic per seed") {
  const ScenarioParams p{.p_noise = 0.2, .seed = 77};
  const ScenarioBundle a = generate_scenario(p), b = generate_scenario(p);
  CHECK(a.gt_landmarks == b.gt_landmarks);
  CHECK(a.odometry == b.odometry);
  CHECK(a.ranges == b.ranges);
  const ScenarioBundle c = generate_scenario(ScenarioParams{.p_noise = 0.2, .seed = 78});
  CHECK(a.gt_landmarks != c.gt_landmarks);
}

TEST_CASE("noise-free increments compose back to the trajectory") {
  const ScenarioBundle b = generate_scenario(ScenarioParams{.seed = 6});
  Pose2d p = b.gt_poses[0];
  double worst = 0.0;
  for (int t = 1; t < 30; ++t) {
    p = compose(p, between(b.gt_poses[t - 1], b.gt_poses[t]));
    worst = std::max(worst, (p.translation() - b.gt_poses[t].translation()).norm());
  }
  CHECK(worst < 1e-12);
  // Noisy increments stay close to the true ones.
  for (int t = 1; t < 30; ++t) {
    const Pose2d truth = between(b.gt_poses[t - 1], b.gt_poses[t]);
    CHECK((b.odometry[t - 1].translation() - truth.translation()).norm() < 0.3);
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(generate_scenario(ScenarioParams{.landmark_count = 1, .p_noise = 0.1}),
                  std::invalid_argument);
  CHECK_NOTHROW(generate_scenario(ScenarioParams{.landmark_count = 1}));
  CHECK_THROWS_AS(generate_scenario(ScenarioParams{.p_noise = 1.5}), std::invalid_argument);
  CHECK_THROWS_AS(generate_scenario(ScenarioParams{.sigma_range = 0.0}), std::invalid_argument);
}

TEST_CASE("bimodal construction") {
  const BimodalScenario s = bimodal_scenario();
  CHECK(s.sigma_range == doctest::Approx(std::sqrt(0.08)));
  CHECK(s.sigma_range == doctest::Approx(0.2828).epsilon(1e-4));
  const auto [upper, lower] = s.modes();
  CHECK((upper - Point2d(2.0, std::sqrt(5.0))).norm() < 1e-12);
  CHECK((lower - Point2d(2.0, -std::sqrt(5.0))).norm() < 1e-12);
  CHECK(s.graph.size() == 4);
  // Each range contributes -(1/2)(1/σ)² = -6.25 nats at the midpoint.
  const double e = range_factor_error(Pose2d(s.anchor_a, 0.0), Point2d(2.0, 0.0), s.range, s.sigma_range);
  CHECK(0.5 * e * e == doctest::Approx(6.25));
}

}  // TEST_SUITE
