#include "sngr/refine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>

#include "sngr/rng.hpp"

namespace sngr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<Pose2d> pose_trajectory(const Values& values, int count) {
  std::vector<Pose2d> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int t = 0; t < count; ++t) out.push_back(values.pose(pose_key(static_cast<std::uint32_t>(t))));
  return out;
}

struct WindowOutcome {
  WindowReport report;
  std::optional<PendingUpdate> update;
};

WindowOutcome refine_window(const FactorGraph& graph, const Values& map, const Window& window,
                            const Eigen::MatrixXd& cov, const SngrOptions& options,
                            std::uint64_t seed) {
  const auto start = Clock::now();
  WindowOutcome out;
  WindowReport& r = out.report;
  r.start = window.start;
  r.refined = true;

  ClosureLikelihood loglike(window_closure(graph, window), map);
  const int d = loglike.closure().dim();
  const PriorTransform prior(Eigen::VectorXd::Zero(d), cov, options.inflation);
  NsConfig cfg = options.sampler;
  cfg.seed = seed;
  const WeightedSamples ws =
      nested_sample([&](const Eigen::VectorXd& x) { return loglike(x); }, prior, cfg);

  const Eigen::VectorXd mean = weighted_mean(ws);
  r.sampler_converged = ws.converged;
  r.log_evidence = ws.log_evidence;
  r.log_evidence_err = ws.log_evidence_err;
  r.ess = ess_fraction(ws);
  r.samples = ws.size();
  r.map_ll = loglike(Eigen::VectorXd::Zero(d));
  r.candidate_ll = loglike(mean);
  r.delta_log_p = r.candidate_ll - r.map_ll;
  r.accepted = ws.converged && gate(r.candidate_ll, r.map_ll);

  PendingUpdate update;
  update.window = window;
  update.delta_log_p = r.delta_log_p;
  update.accepted = r.accepted;
  for (int i = 0; i < window.size(); ++i) {
    const Pose2d& at = map.pose(window.keys[static_cast<std::size_t>(i)]);
    const Pose2d moved = retract(at, Eigen::Vector3d(mean.segment<3>(3 * i)));
    r.max_shift = std::max(r.max_shift, (moved.translation() - at.translation()).norm());
    update.candidate.push_back(moved);
  }
  if (r.accepted) out.update = std::move(update);
  r.seconds = seconds_since(start);
  return out;
}

}  // namespace

int Closure::dim() const {
  int d = 0;
  for (const VarKey& k : free_keys) d += k.tangent_dim();
  return d;
}

Closure variable_closure(const FactorGraph& graph, const std::vector<VarKey>& free_keys) {
  const std::set<VarKey> free(free_keys.begin(), free_keys.end());
  if (free.size() != free_keys.size()) throw std::invalid_argument("closure keys must be distinct");
  for (const VarKey& k : free_keys)
    if (!graph.variables().count(k)) throw MissingVariable(k);

  Closure c;
  c.free_keys = free_keys;
  std::set<VarKey> fixed;
  for (const Factor& f : graph.factors()) {
    const std::vector<VarKey> keys = factor_keys(f);
    if (std::none_of(keys.begin(), keys.end(), [&](const VarKey& k) { return free.count(k) != 0; }))
      continue;
    c.factors.push_back(f);
    for (const VarKey& k : keys)
      if (!free.count(k)) fixed.insert(k);
  }
  c.fixed_keys.assign(fixed.begin(), fixed.end());
  return c;
}

Closure window_closure(const FactorGraph& graph, const Window& window) {
  return variable_closure(graph, window.keys);
}

Values closure_values(const Closure& closure, const Eigen::VectorXd& offsets, const Values& map) {
  if (offsets.size() != closure.dim()) throw std::invalid_argument("offset dimension mismatch");
  Values v;
  for (const VarKey& k : closure.fixed_keys) {
    if (k.is_pose())
      v.insert(k, map.pose(k));
    else
      v.insert(k, map.landmark(k));
  }
  Eigen::Index off = 0;
  for (const VarKey& k : closure.free_keys) {
    if (k.is_pose()) {
      v.insert(k, retract(map.pose(k), Eigen::Vector3d(offsets.segment<3>(off))));
    } else {
      v.insert(k, Point2d(map.landmark(k) + offsets.segment<2>(off)));
    }
    off += k.tangent_dim();
  }
  return v;
}

double window_loglike(const Closure& closure, const Values& values) {
  return log_likelihood(closure.factors, values);
}

double window_loglike(const Closure& closure, const Eigen::VectorXd& offsets, const Values& map) {
  return window_loglike(closure, closure_values(closure, offsets, map));
}

ClosureLikelihood::ClosureLikelihood(Closure closure, const Values& map)
    : closure_(std::move(closure)),
      base_(closure_values(closure_, Eigen::VectorXd::Zero(closure_.dim()), map)) {}

double ClosureLikelihood::operator()(const Eigen::VectorXd& offsets) const {
  return window_loglike(closure_, offsets, base_);
}

Values apply_updates(const Values& map, std::vector<PendingUpdate> pending) {
  std::stable_sort(pending.begin(), pending.end(),
                   [](const PendingUpdate& a, const PendingUpdate& b) {
                     return a.window.start < b.window.start;
                   });
  Values out = map;
  for (const PendingUpdate& u : pending) {
    if (!u.accepted) throw std::invalid_argument("apply_updates given a rejected window");
    if (u.candidate.size() != u.window.keys.size())
      throw std::invalid_argument("candidate does not match window size");
    for (std::size_t i = 0; i < u.candidate.size(); ++i) {
      if (!out.contains(u.window.keys[i])) throw MissingVariable(u.window.keys[i]);
      out.insert(u.window.keys[i], u.candidate[i]);
    }
  }
  return out;
}

Point2d trilaterate(std::span<const Point2d> origins, std::span<const double> ranges,
                    double grid_step) {
  if (origins.empty() || origins.size() != ranges.size())
    throw std::invalid_argument("trilaterate needs matching, nonempty origins and ranges");
  if (!(grid_step > 0.0)) throw std::invalid_argument("trilaterate grid step must be positive");
  auto cost = [&](const Point2d& p) {
    double c = 0.0;
    for (std::size_t i = 0; i < origins.size(); ++i) {
      const double r = (p - origins[i]).norm() - ranges[i];
      c += r * r;
    }
    return c;
  };

  Point2d center = Point2d::Zero();
  for (const Point2d& o : origins) center += o;
  center /= static_cast<double>(origins.size());
  double reach = 0.0;
  for (std::size_t i = 0; i < origins.size(); ++i)
    reach = std::max(reach, (origins[i] - center).norm() + ranges[i]);
  reach += grid_step;
  const int half = static_cast<int>(std::ceil(reach / grid_step));

  Point2d best = center;
  double best_cost = cost(center);
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      const Point2d p = center + grid_step * Point2d(i, j);
      const double c = cost(p);
      if (c < best_cost) {
        best_cost = c;
        best = p;
      }
    }
  }

  for (int iter = 0; iter < 20; ++iter) {
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < origins.size(); ++i) {
      const Eigen::Vector2d diff = best - origins[i];
      const double dist = diff.norm();
      if (dist <= 0.0) continue;
      const Eigen::RowVector2d J = diff.transpose() / dist;
      H += J.transpose() * J;
      g += J.transpose() * (dist - ranges[i]);
    }
    const Eigen::Vector2d step = -H.ldlt().solve(g);
    if (!step.allFinite()) break;
    const Point2d next = best + step;
    if (cost(next) > best_cost) break;
    best = next;
    best_cost = cost(next);
    if (step.norm() < 1e-10) break;
  }
  return best;
}

SolverRun incremental_solve(const ScenarioBundle& bundle, const FrontEndParams& params) {
  const auto start = Clock::now();
  const ScenarioParams& p = bundle.params;
  SolverRun run;
  FactorGraph& graph = run.graph;
  Values& values = run.estimate;
  std::set<VarKey> anchored;
  std::map<VarKey, std::vector<std::pair<VarKey, double>>> buffered;

  auto maybe_anchor = [&](const VarKey& lk) {
    if (graph.range_count(lk) >= params.landmark_prior_after && !anchored.count(lk)) {
      anchored.insert(lk);
      graph.add(LandmarkPrior{lk, values.landmark(lk),
                              Eigen::Vector2d::Constant(params.landmark_prior_sigma)});
    }
  };

  const VarKey first = pose_key(0);
  const ScenarioParams& sp = bundle.params;
  const Eigen::Vector3d prior_sigma =
      params.first_pose_sigma.value_or(Eigen::Vector3d(sp.sigma_t, sp.sigma_t, sp.sigma_rot));
  graph.add(PosePrior{first, bundle.gt_poses.front(), prior_sigma});
  values.insert(first, bundle.gt_poses.front());

  std::size_t next_range = 0;
  for (int t = 0; t < p.pose_count; ++t) {
    const VarKey xt = pose_key(static_cast<std::uint32_t>(t));
    if (t > 0) {
      const VarKey prev = pose_key(static_cast<std::uint32_t>(t - 1));
      const Pose2d& u = bundle.odometry[static_cast<std::size_t>(t - 1)];
      values.insert(xt, compose(values.pose(prev), u));
      graph.add(Odometry{prev, xt, u, Eigen::Vector3d(p.sigma_t, p.sigma_t, p.sigma_rot)});
    }
    for (; next_range < bundle.ranges.size() && bundle.ranges[next_range].t == t; ++next_range) {
      const RangeMeasurement& m = bundle.ranges[next_range];
      const VarKey lk = landmark_key(static_cast<std::uint32_t>(m.reported_k));
      if (values.contains(lk)) {
        graph.add(Range{xt, lk, m.z, p.sigma_range});
        maybe_anchor(lk);
      } else {
        buffered[lk].emplace_back(xt, m.z);
      }
    }
    for (auto it = buffered.begin(); it != buffered.end();) {
      const auto& rows = it->second;
      if (rows.size() < std::max<std::size_t>(params.landmark_init_observations, 1)) {
        ++it;
        continue;
      }
      std::vector<Point2d> origins;
      std::vector<double> ranges;
      for (const auto& [pk, z] : rows) {
        origins.push_back(values.pose(pk).translation());
        ranges.push_back(z);
      }
      values.insert(it->first, trilaterate(origins, ranges, params.landmark_init_grid));
      for (const auto& [pk, z] : rows) graph.add(Range{pk, it->first, z, p.sigma_range});
      maybe_anchor(it->first);
      it = buffered.erase(it);
    }
    values = solve_map(graph, values, params.lm);
  }
  run.seconds = seconds_since(start);
  return run;
}

double noop_mean_log_weight(const Eigen::MatrixXd& window_cov, std::uint64_t seed, int samples,
                            double proposal_sigma) {
  const Eigen::Index d = window_cov.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (window_cov + window_cov.transpose()));
  if (llt.info() != Eigen::Success) throw std::domain_error("window covariance is not positive definite");
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_2pi = std::log(2.0 * std::numbers::pi);
  Rng rng(seed);
  double sum = 0.0;
  Eigen::VectorXd x(d);
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) x(i) = proposal_sigma * rng.normal();
    const Eigen::VectorXd white = llt.matrixL().solve(x);
    const double log_target = -0.5 * (white.squaredNorm() + log_det + d * log_2pi);
    const double log_proposal = -0.5 * (x.squaredNorm() / (proposal_sigma * proposal_sigma) +
                                        2.0 * d * std::log(proposal_sigma) + d * log_2pi);
    sum += log_target - log_proposal;
  }
  return sum / samples;
}

RunReport run_sngr(const ScenarioBundle& scenario, const SngrOptions& options) {
  RunReport report;
  report.params = scenario.params;
  report.options = options;
  report.gt_poses = scenario.gt_poses;
  report.gt_landmarks = scenario.gt_landmarks;
  const int T = scenario.params.pose_count;

  const SolverRun solved = incremental_solve(scenario, options.front_end);
  report.solver_seconds = solved.seconds;
  const Values& map = solved.estimate;
  report.solver_poses = pose_trajectory(map, T);

  std::vector<VarKey> pose_keys;
  for (int t = 0; t < T; ++t) pose_keys.push_back(pose_key(static_cast<std::uint32_t>(t)));
  const MarginalCov joint = joint_marginal_covariance(solved.graph, map, pose_keys);

  const std::vector<Window> windows = enumerate_windows(T, options.window_size);
  const std::vector<bool> failed =
      failure_labels(report.solver_poses, report.gt_poses, windows, options.failure_epsilon);
  const std::uint64_t run_seed = mix_seed(scenario.params.seed, options.sampler.seed);

  std::vector<Eigen::MatrixXd> window_cov;
  std::vector<std::size_t> triggered_idx;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Eigen::Index off = 3 * windows[i].start;
    const Eigen::Index d = 3 * windows[i].size();
    window_cov.push_back(joint.matrix.block(off, off, d, d));
    WindowReport r;
    r.start = windows[i].start;
    r.score = window_score(window_cov.back());
    r.triggered = exceeds(r.score, options.tau);
    r.failed = failed[i];
    report.windows.push_back(r);
    if (r.triggered) triggered_idx.push_back(i);
  }

  std::vector<PendingUpdate> pending;
  const auto refine_start = Clock::now();
  if (options.mode == RefineMode::NestedSampling) {
    std::vector<WindowOutcome> outcomes(triggered_idx.size());
    auto work = [&](std::size_t j) {
      const std::size_t i = triggered_idx[j];
      outcomes[j] = refine_window(solved.graph, map, windows[i], window_cov[i], options,
                                  mix_seed(run_seed, static_cast<std::uint64_t>(windows[i].start)));
    };
    const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(outcomes.size())));
    if (jobs <= 1) {
      for (std::size_t j = 0; j < outcomes.size(); ++j) work(j);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      for (int k = 0; k < jobs; ++k)
        pool.emplace_back([&] {
          for (std::size_t j = next++; j < outcomes.size(); j = next++) work(j);
        });
    }
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
      WindowReport& r = report.windows[triggered_idx[j]];
      const WindowReport& o = outcomes[j].report;
      const double score = r.score;
      const bool fail = r.failed;
      r = o;
      r.score = score;
      r.triggered = true;
      r.failed = fail;
      report.refine_seconds += o.seconds;
      ++report.sampler_invocations;
      if (outcomes[j].update) pending.push_back(*outcomes[j].update);
    }
  } else {
    for (std::size_t i : triggered_idx) {
      const auto start = Clock::now();
      report.windows[i].noop_mean_log_weight = noop_mean_log_weight(
          window_cov[i], mix_seed(run_seed, static_cast<std::uint64_t>(windows[i].start)));
      report.windows[i].seconds = seconds_since(start);
      report.refine_seconds += report.windows[i].seconds;
    }
  }

  const Values refined = apply_updates(map, pending);
  report.refine_wall_seconds = seconds_since(refine_start);
  report.poses = pose_trajectory(refined, T);
  for (int k = 0; k < scenario.params.landmark_count; ++k) {
    const VarKey lk = landmark_key(static_cast<std::uint32_t>(k));
    report.landmarks.push_back(refined.contains(lk) ? refined.landmark(lk)
                                                    : Point2d::Constant(std::nan("")));
  }

  for (int t = 0; t < T; ++t) {
    const Eigen::Matrix2d body = joint.matrix.block<2, 2>(3 * t, 3 * t);
    const Eigen::Matrix2d R = report.solver_poses[static_cast<std::size_t>(t)].rotation();
    report.position_cov.push_back(R * body * R.transpose());
    report.solver_nees.push_back(nees(report.solver_poses[static_cast<std::size_t>(t)],
                                      report.gt_poses[static_cast<std::size_t>(t)],
                                      report.position_cov.back()));
    report.nees.push_back(nees(report.poses[static_cast<std::size_t>(t)],
                               report.gt_poses[static_cast<std::size_t>(t)],
                               report.position_cov.back()));
  }
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  report.mean_nees = mean_of(report.nees);
  report.solver_mean_nees = mean_of(report.solver_nees);
  report.rmse = rmse(report.poses, report.gt_poses);
  report.solver_rmse = rmse(report.solver_poses, report.gt_poses);
  {
    double sum = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < report.landmarks.size(); ++k) {
      if (!report.landmarks[k].allFinite()) continue;
      sum += (report.landmarks[k] - report.gt_landmarks[k]).squaredNorm();
      ++n;
    }
    report.landmark_rmse = n > 0 ? std::sqrt(sum / n) : 0.0;
  }

  std::vector<bool> trig_flags;
  for (const WindowReport& r : report.windows) {
    trig_flags.push_back(r.triggered);
    report.triggered += r.triggered ? 1 : 0;
    report.failed += r.failed ? 1 : 0;
    report.accepted += r.accepted ? 1 : 0;
  }
  report.trigger_quality = precision_recall(trig_flags, failed);

  if (report.triggered > 0) {
    report.per_window_seconds = report.refine_seconds / report.triggered;
  } else if (options.mode == RefineMode::NestedSampling && options.exhaustive_probe &&
             !windows.empty()) {
    const WindowOutcome probe = refine_window(solved.graph, map, windows.front(), window_cov.front(),
                                              options, mix_seed(run_seed, 0));
    report.per_window_seconds = probe.report.seconds;
  }
  report.exhaustive_seconds = report.per_window_seconds * static_cast<double>(windows.size());
  return report;
}

}  // namespace sngr
