#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sngr/graph.hpp"
#include "sngr/metrics.hpp"
#include "sngr/sampler.hpp"
#include "sngr/scenario.hpp"
#include "sngr/solver.hpp"
#include "sngr/trigger.hpp"

namespace sngr {

/// Factors touching the free variables, plus the other variables those
/// factors reference (held at their MAP values).
struct Closure {
  std::vector<VarKey> free_keys;
  std::vector<VarKey> fixed_keys;
  std::vector<Factor> factors;

  int dim() const;
};

Closure variable_closure(const FactorGraph& graph, const std::vector<VarKey>& free_keys);
Closure window_closure(const FactorGraph& graph, const Window& window);

/// Closure variables with the free ones moved to map ⊕ offsets.
Values closure_values(const Closure& closure, const Eigen::VectorXd& offsets, const Values& map);

/// -1/2 Σ over the closure factors of the squared whitened error.
double window_loglike(const Closure& closure, const Values& values);
double window_loglike(const Closure& closure, const Eigen::VectorXd& offsets, const Values& map);

/// Callable likelihood over tangent offsets for the sampler.
class ClosureLikelihood {
 public:
  ClosureLikelihood(Closure closure, const Values& map);
  double operator()(const Eigen::VectorXd& offsets) const;
  const Closure& closure() const { return closure_; }

 private:
  Closure closure_;
  Values base_;
};

inline constexpr double kGateTolerance = 1e-3;

/// Accept a candidate unless it loses more than 1e-3 nats against the MAP.
inline bool gate(double candidate_ll, double map_ll) {
  return candidate_ll >= map_ll - kGateTolerance;
}

struct PendingUpdate {
  Window window;
  std::vector<Pose2d> candidate;
  double delta_log_p = 0.0;
  bool accepted = false;
};

/// Overwrites window poses with accepted candidates in ascending start
/// order, so later windows win on shared poses.
Values apply_updates(const Values& map, std::vector<PendingUpdate> pending);

struct FrontEndParams {
  /// Prior stds on x0; defaults to the scenario's odometry noise.
  std::optional<Eigen::Vector3d> first_pose_sigma;
  double landmark_prior_sigma = 10.0;
  std::size_t landmark_prior_after = 3;
  /// Range rows buffered per landmark before it enters the graph.
  std::size_t landmark_init_observations = 5;
  /// Trilateration grid spacing in meters.
  double landmark_init_grid = 0.05;
  LmParams lm;
};

struct SolverRun {
  FactorGraph graph;
  Values estimate;
  double seconds = 0.0;
};

/// Least-squares landmark position from ranges taken at known positions:
/// exhaustive grid search followed by Gauss-Newton polishing.
Point2d trilaterate(std::span<const Point2d> origins, std::span<const double> ranges,
                    double grid_step = 0.05);

/// Adds measurements pose by pose and re-solves after each one. A landmark
/// enters the graph once it has `landmark_init_observations` ranges,
/// initialized by trilateration from the current pose estimates.
SolverRun incremental_solve(const ScenarioBundle& bundle, const FrontEndParams& params = {});

enum class RefineMode { NestedSampling, TriggerOnly };

struct SngrOptions {
  double tau = 0.0;
  NsConfig sampler;
  double inflation = 1.0;
  RefineMode mode = RefineMode::NestedSampling;
  int window_size = 3;
  double failure_epsilon = 0.5;
  /// Time one window when nothing triggers, for the exhaustive-cost estimate.
  bool exhaustive_probe = true;
  /// Triggered windows refined concurrently.
  int jobs = 1;
  FrontEndParams front_end;
};

struct WindowReport {
  int start = 0;
  double score = 0.0;
  bool triggered = false;
  bool failed = false;
  bool refined = false;
  bool sampler_converged = false;
  double log_evidence = 0.0;
  double log_evidence_err = 0.0;
  double ess = 0.0;
  long samples = 0;
  double map_ll = 0.0;
  double candidate_ll = 0.0;
  double delta_log_p = 0.0;
  bool accepted = false;
  double max_shift = 0.0;
  double seconds = 0.0;
  std::optional<double> noop_mean_log_weight;
};

struct RunReport {
  ScenarioParams params;
  SngrOptions options;

  std::vector<Pose2d> gt_poses;
  std::vector<Point2d> gt_landmarks;
  std::vector<Pose2d> solver_poses;
  std::vector<Pose2d> poses;
  std::vector<Point2d> landmarks;
  /// World-frame 2x2 position marginals from the solver.
  std::vector<Eigen::Matrix2d> position_cov;
  std::vector<double> nees;
  std::vector<double> solver_nees;
  std::vector<WindowReport> windows;

  double rmse = 0.0;
  double solver_rmse = 0.0;
  double landmark_rmse = 0.0;
  double mean_nees = 0.0;
  double solver_mean_nees = 0.0;
  PrecisionRecall trigger_quality;
  int triggered = 0;
  int failed = 0;
  int accepted = 0;
  int sampler_invocations = 0;

  double solver_seconds = 0.0;
  /// Sum of per-window refinement times.
  double refine_seconds = 0.0;
  /// Wall clock of the whole refinement phase.
  double refine_wall_seconds = 0.0;
  double per_window_seconds = 0.0;
  double exhaustive_seconds = 0.0;
};

/// Solve, score every window, refine triggered ones, gate, apply.
RunReport run_sngr(const ScenarioBundle& scenario, const SngrOptions& options);

/// Mean log importance weight of the trigger-only no-op sampler: 500 draws
/// from N(0, 0.5² I) in window tangent space, weighted by N(0, Σw).
double noop_mean_log_weight(const Eigen::MatrixXd& window_cov, std::uint64_t seed,
                            int samples = 500, double proposal_sigma = 0.5);

}  // namespace sngr
