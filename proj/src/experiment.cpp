#include "sngr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

#include "sngr/metrics.hpp"
#include "sngr/solver.hpp"

namespace sngr {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::Calibrate: return "calibrate";
    case ExperimentMode::Baseline: return "baseline";
    case ExperimentMode::Sngr: return "sngr";
    case ExperimentMode::Bimodal: return "bimodal";
    case ExperimentMode::Report: return "report";
  }
  return "unknown";
}

ExperimentMode parse_mode(std::string_view name) {
  for (ExperimentMode m : {ExperimentMode::Calibrate, ExperimentMode::Baseline, ExperimentMode::Sngr,
                           ExperimentMode::Bimodal, ExperimentMode::Report})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown mode " + std::string(name));
}

void ExperimentConfig::validate() const {
  const bool pipeline = mode == ExperimentMode::Baseline || mode == ExperimentMode::Sngr;
  if (pipeline && !tau) throw std::invalid_argument("baseline and sngr modes need --tau");
  if (tau && !std::isfinite(*tau)) throw std::invalid_argument("tau must be finite");
  if (mode != ExperimentMode::Bimodal && mode != ExperimentMode::Report && !scenario_json) {
    if (noise_levels.empty()) throw std::invalid_argument("no noise levels given");
    if (seeds.empty()) throw std::invalid_argument("no seeds given");
  }
  for (double p : noise_levels)
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise levels must lie in [0, 1]");
  if (mode == ExperimentMode::Calibrate && !scenario_json) {
    const bool clean = std::count(noise_levels.begin(), noise_levels.end(), 0.0) > 0;
    const bool noisy = std::any_of(noise_levels.begin(), noise_levels.end(),
                                   [](double p) { return p > 0.0; });
    if (!clean || !noisy)
      throw std::invalid_argument("calibration needs p = 0 and at least one p > 0");
  }
  if (mode == ExperimentMode::Calibrate && scenario_json)
    throw std::invalid_argument("calibration generates its own scenarios");
  if (inflation && !(*inflation > 0.0)) throw std::invalid_argument("inflation must be positive");
  if (sampler.n_live < 2) throw std::invalid_argument("n_live must be at least 2");
  if (!(sampler.dlogz_stop > 0.0)) throw std::invalid_argument("dlogz must be positive");
  if (jobs < 1) throw std::invalid_argument("jobs must be at least 1");
}

double ExperimentConfig::effective_inflation() const {
  return inflation.value_or(mode == ExperimentMode::Bimodal ? 50.0 : 1.0);
}

ScenarioParams benchmark_params(double p_noise, std::uint64_t seed) {
  ScenarioParams p;
  p.p_noise = p_noise;
  p.seed = seed;
  return p;
}

std::string run_stem(double p_noise, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "p%.2f_s%llu", p_noise, static_cast<unsigned long long>(seed));
  return buf;
}

RunSummary summary_from_json(const json& run) {
  if (run.at("version").get<int>() != kSchemaVersion || run.at("kind") != "run")
    throw std::runtime_error("not a version-" + std::to_string(kSchemaVersion) + " run report");
  const json& m = run.at("metrics");
  RunSummary s;
  s.mode = run.at("mode").get<std::string>();
  s.p_noise = run.at("params").at("p_noise").get<double>();
  s.seed = run.at("params").at("seed").get<std::uint64_t>();
  s.tau = run.at("options").at("tau").get<double>();
  s.rmse = m.at("rmse").get<double>();
  s.solver_rmse = m.at("solver_rmse").get<double>();
  s.mean_nees = m.at("mean_nees").get<double>();
  s.solver_mean_nees = m.at("solver_mean_nees").get<double>();
  s.true_positives = m.at("true_positives").get<int>();
  s.false_positives = m.at("false_positives").get<int>();
  s.false_negatives = m.at("false_negatives").get<int>();
  s.windows = m.at("windows").get<int>();
  s.triggered = m.at("triggered").get<int>();
  s.failed = m.at("failed").get<int>();
  s.accepted = m.at("accepted").get<int>();
  s.solver_seconds = m.at("solver_seconds").get<double>();
  s.refine_seconds = m.at("refine_seconds").get<double>();
  s.per_window_seconds = m.at("per_window_seconds").get<double>();
  s.exhaustive_seconds = m.at("exhaustive_seconds_estimate").get<double>();
  return s;
}

std::vector<AggregateRow> aggregate(const std::vector<RunSummary>& runs) {
  std::map<double, std::vector<const RunSummary*>> by_noise;
  for (const RunSummary& r : runs) by_noise[r.p_noise].push_back(&r);
  std::vector<AggregateRow> rows;
  for (const auto& [p, group] : by_noise) {
    AggregateRow row;
    row.p_noise = p;
    row.runs = static_cast<int>(group.size());
    std::vector<double> nees;
    int tp = 0, fp = 0, fn = 0;
    for (const RunSummary* r : group) {
      row.rmse_mean += r->rmse;
      row.nees += r->mean_nees;
      nees.push_back(r->mean_nees);
      tp += r->true_positives;
      fp += r->false_positives;
      fn += r->false_negatives;
      row.triggered += r->triggered;
      row.failed += r->failed;
      row.accepted += r->accepted;
      row.refine_seconds += r->refine_seconds;
      row.solver_seconds += r->solver_seconds;
      row.exhaustive_seconds += r->exhaustive_seconds;
    }
    const double n = static_cast<double>(group.size());
    row.rmse_mean /= n;
    row.nees /= n;
    if (group.size() > 1) {
      double ss = 0.0;
      for (const RunSummary* r : group) ss += (r->rmse - row.rmse_mean) * (r->rmse - row.rmse_mean);
      row.rmse_std = std::sqrt(ss / (n - 1.0));
    }
    std::sort(nees.begin(), nees.end());
    const std::size_t mid = nees.size() / 2;
    row.nees_median = nees.size() % 2 ? nees[mid] : 0.5 * (nees[mid - 1] + nees[mid]);
    if (tp + fp > 0) row.precision = static_cast<double>(tp) / (tp + fp);
    if (tp + fn > 0) row.recall = static_cast<double>(tp) / (tp + fn);
    rows.push_back(row);
  }
  return rows;
}

CsvWriter aggregate_csv(const std::vector<AggregateRow>& rows) {
  CsvWriter csv({"p", "rmse_mean", "rmse_std", "nees", "precision", "recall", "triggered",
                 "failed", "refine_seconds", "solver_seconds", "exhaustive_seconds_estimate",
                 "nees_median", "accepted", "runs"});
  for (const AggregateRow& r : rows) {
    csv.cell(r.p_noise).cell(r.rmse_mean).cell(r.rmse_std).cell(r.nees).cell(r.precision)
        .cell(r.recall).cell(r.triggered).cell(r.failed).cell(r.refine_seconds)
        .cell(r.solver_seconds).cell(r.exhaustive_seconds).cell(r.nees_median).cell(r.accepted)
        .cell(r.runs);
    csv.end_row();
  }
  return csv;
}

namespace {

double p_of(const json& run) { return run.at("params").at("p_noise").get<double>(); }
std::uint64_t seed_of(const json& run) { return run.at("params").at("seed").get<std::uint64_t>(); }

std::optional<double> number_or_empty(const json& w, const char* key) {
  if (!w.contains(key) || w.at(key).is_null()) return std::nullopt;
  return w.at(key).get<double>();
}

}  // namespace

CsvWriter per_window_csv(const std::vector<json>& runs) {
  CsvWriter csv({"p", "seed", "window", "score", "triggered", "failed", "refined", "accepted",
                 "delta_log_p", "ess"});
  for (const json& run : runs) {
    for (const json& w : run.at("windows")) {
      csv.cell(p_of(run)).cell(seed_of(run)).cell(w.at("start").get<int>())
          .cell(w.at("score").get<double>()).cell(w.at("triggered").get<bool>())
          .cell(w.at("failed").get<bool>()).cell(w.at("refined").get<bool>())
          .cell(w.at("accepted").get<bool>()).cell(number_or_empty(w, "delta_log_p"))
          .cell(number_or_empty(w, "ess"));
      csv.end_row();
    }
  }
  return csv;
}

CsvWriter tau_sweep_csv(const std::vector<json>& runs, const std::vector<double>& taus) {
  CsvWriter csv({"p", "seed", "tau", "triggered", "windows"});
  for (const json& run : runs) {
    for (double tau : taus) {
      int count = 0;
      for (const json& w : run.at("windows")) count += exceeds(w.at("score").get<double>(), tau);
      csv.cell(p_of(run)).cell(seed_of(run)).cell(tau).cell(count)
          .cell(static_cast<int>(run.at("windows").size()));
      csv.end_row();
    }
  }
  return csv;
}

std::vector<fs::path> emit_plot_data(const std::vector<json>& runs, const fs::path& dir) {
  CsvWriter traj({"p", "seed", "t", "gt_x", "gt_y", "solver_x", "solver_y", "est_x", "est_y"});
  CsvWriter lms({"p", "seed", "k", "gt_x", "gt_y", "est_x", "est_y"});
  CsvWriter scores({"p", "seed", "window", "score", "tau", "triggered", "failed"});
  CsvWriter nees({"p", "seed", "mean_nees", "solver_mean_nees", "rmse", "triggered", "failed"});
  CsvWriter refine({"p", "seed", "window", "delta_log_p", "ess", "accepted", "log_evidence",
                    "log_evidence_err", "max_shift"});
  for (const json& run : runs) {
    const double p = p_of(run);
    const std::uint64_t seed = seed_of(run);
    for (const json& pose : run.at("poses")) {
      traj.cell(p).cell(seed).cell(pose.at("t").get<int>());
      for (const char* key : {"gt", "solver", "estimate"})
        traj.cell(pose.at(key).at(0).get<double>()).cell(pose.at(key).at(1).get<double>());
      traj.end_row();
    }
    for (const json& lm : run.at("landmarks")) {
      lms.cell(p).cell(seed).cell(lm.at("k").get<int>());
      for (const char* key : {"gt", "estimate"}) {
        for (int i = 0; i < 2; ++i) {
          const json& v = lm.at(key).at(i);
          lms.cell(v.is_null() ? std::optional<double>() : std::optional<double>(v.get<double>()));
        }
      }
      lms.end_row();
    }
    const double tau = run.at("options").at("tau").get<double>();
    for (const json& w : run.at("windows")) {
      scores.cell(p).cell(seed).cell(w.at("start").get<int>()).cell(w.at("score").get<double>())
          .cell(tau).cell(w.at("triggered").get<bool>()).cell(w.at("failed").get<bool>());
      scores.end_row();
      if (w.at("triggered").get<bool>() && w.at("refined").get<bool>()) {
        refine.cell(p).cell(seed).cell(w.at("start").get<int>())
            .cell(w.at("delta_log_p").get<double>()).cell(w.at("ess").get<double>())
            .cell(w.at("accepted").get<bool>()).cell(w.at("log_evidence").get<double>())
            .cell(w.at("log_evidence_err").get<double>()).cell(w.at("max_shift").get<double>());
        refine.end_row();
      }
    }
    const json& m = run.at("metrics");
    nees.cell(p).cell(seed).cell(m.at("mean_nees").get<double>())
        .cell(m.at("solver_mean_nees").get<double>()).cell(m.at("rmse").get<double>())
        .cell(m.at("triggered").get<int>()).cell(m.at("failed").get<int>());
    nees.end_row();
  }
  std::vector<fs::path> written;
  auto save = [&](const CsvWriter& csv, const char* name) {
    csv.save(dir / name);
    written.push_back(dir / name);
  };
  save(traj, "fig1_trajectory.csv");
  save(lms, "fig1_landmarks.csv");
  save(scores, "fig3_window_scores.csv");
  save(nees, "fig4_nees.csv");
  save(refine, "fig6_refinement.csv");
  return written;
}

BimodalReport run_bimodal(const NsConfig& cfg, double inflation, double regularizer_sigma) {
  const auto start = std::chrono::steady_clock::now();
  const BimodalScenario s = bimodal_scenario();
  BimodalReport r;
  r.inflation = inflation;
  r.initial = s.initial.landmark(s.landmark);
  const Values map = solve_map(s.graph, s.initial);
  r.map_estimate = map.landmark(s.landmark);

  const ClosureLikelihood loglike(variable_closure(s.graph, {s.landmark}), map);
  r.map_ll = loglike(Eigen::Vector2d::Zero());
  r.initial_ll = loglike(Eigen::Vector2d(r.initial - r.map_estimate));

  FactorGraph regularized = s.graph;
  regularized.add(LandmarkPrior{s.landmark, r.map_estimate,
                                Eigen::Vector2d::Constant(regularizer_sigma)});
  r.prior_cov = joint_marginal_covariance(regularized, map, {s.landmark}).matrix;

  const PriorTransform prior(Eigen::Vector2d::Zero(), r.prior_cov, inflation);
  r.samples = nested_sample([&](const Eigen::VectorXd& x) { return loglike(x); }, prior, cfg);
  r.samples.points.colwise() += r.map_estimate;

  const Eigen::Index best = best_sample(r.samples);
  r.best = r.samples.points.col(best);
  r.best_ll = r.samples.log_likelihoods(best);
  const auto [upper, lower] = s.modes();
  r.best_mode_distance = std::min((r.best - upper).norm(), (r.best - lower).norm());
  r.weighted_mean = weighted_mean(r.samples);
  r.weighted_mean_ll = loglike(Eigen::Vector2d(r.weighted_mean - r.map_estimate));
  r.delta_log_p = r.best_ll - r.map_ll;
  r.sigma_y = weighted_std(r.samples, 1);
  r.bimodality = bimodality_coefficient(r.samples, 1);
  const Eigen::VectorXd w = r.samples.weights();
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (r.samples.points(1, i) > r.map_estimate.y())
      r.share_upper += w(i);
    else if (r.samples.points(1, i) < r.map_estimate.y())
      r.share_lower += w(i);
  }
  r.log_evidence = r.samples.log_evidence;
  r.log_evidence_err = r.samples.log_evidence_err;
  r.ess = ess_fraction(r.samples);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

json to_json(const BimodalReport& r, bool timing) {
  auto pt = [](const Point2d& p) { return json::array({p.x(), p.y()}); };
  return json{{"version", kSchemaVersion},
              {"kind", "bimodal"},
              {"inflation", r.inflation},
              {"n_samples", r.samples.size()},
              {"initial", pt(r.initial)},
              {"initial_log_likelihood", r.initial_ll},
              {"map_estimate", pt(r.map_estimate)},
              {"map_log_likelihood", r.map_ll},
              {"best_sample", pt(r.best)},
              {"best_log_likelihood", r.best_ll},
              {"best_mode_distance", r.best_mode_distance},
              {"weighted_mean", pt(r.weighted_mean)},
              {"weighted_mean_log_likelihood", r.weighted_mean_ll},
              {"delta_log_p", r.delta_log_p},
              {"weighted_sigma_y", r.sigma_y},
              {"bimodality_coefficient", r.bimodality},
              {"mode_share_upper", r.share_upper},
              {"mode_share_lower", r.share_lower},
              {"log_evidence", r.log_evidence},
              {"log_evidence_err", r.log_evidence_err},
              {"ess_fraction", r.ess},
              {"converged", r.samples.converged},
              {"prior_cov", json::array({r.prior_cov(0, 0), r.prior_cov(0, 1), r.prior_cov(1, 1)})},
              {"seconds", timing ? r.seconds : 0.0}};
}

std::vector<fs::path> emit_bimodal_plot_data(const BimodalReport& r, const fs::path& dir, int bins,
                                             double half_width) {
  if (bins < 1 || !(half_width > 0.0)) throw std::invalid_argument("bad histogram layout");
  CsvWriter samples({"x", "y", "weight", "log_likelihood"});
  const Eigen::VectorXd w = r.samples.weights();
  for (Eigen::Index i = 0; i < r.samples.size(); ++i) {
    samples.cell(r.samples.points(0, i)).cell(r.samples.points(1, i)).cell(w(i))
        .cell(r.samples.log_likelihoods(i));
    samples.end_row();
  }
  const double width = 2.0 * half_width / bins;
  std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
  for (Eigen::Index i = 0; i < r.samples.size(); ++i) {
    const double y = r.samples.points(1, i);
    const int b = static_cast<int>(std::floor((y + half_width) / width));
    if (b >= 0 && b < bins) mass[static_cast<std::size_t>(b)] += w(i);
  }
  CsvWriter hist({"y_center", "density"});
  for (int b = 0; b < bins; ++b) {
    hist.cell(-half_width + (b + 0.5) * width).cell(mass[static_cast<std::size_t>(b)] / width);
    hist.end_row();
  }
  samples.save(dir / "fig2_samples.csv");
  hist.save(dir / "fig2_histogram.csv");
  return {dir / "fig2_samples.csv", dir / "fig2_histogram.csv"};
}

namespace {

struct RunJob {
  ScenarioBundle bundle;
  json report;
};

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (int k = 0; k < workers; ++k)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<ScenarioBundle> scenarios_for(const ExperimentConfig& cfg) {
  std::vector<ScenarioBundle> out;
  if (cfg.scenario_json) {
    out.push_back(load_bundle(*cfg.scenario_json));
    return out;
  }
  for (double p : cfg.noise_levels)
    for (std::uint64_t seed : cfg.seeds) out.push_back(generate_scenario(benchmark_params(p, seed)));
  return out;
}

SngrOptions options_for(const ExperimentConfig& cfg, RefineMode mode, double tau) {
  SngrOptions o;
  o.tau = tau;
  o.sampler = cfg.sampler;
  o.inflation = cfg.effective_inflation();
  o.mode = mode;
  o.exhaustive_probe = cfg.timing;
  return o;
}

std::vector<json> load_runs(const fs::path& dir, std::string_view mode) {
  std::vector<fs::path> files;
  const fs::path runs_dir = dir / "runs";
  if (fs::is_directory(runs_dir))
    for (const auto& e : fs::directory_iterator(runs_dir)) {
      const std::string name = e.path().filename().string();
      if (e.is_regular_file() && name.starts_with(std::string(mode) + "_") &&
          e.path().extension() == ".json")
        files.push_back(e.path());
    }
  std::sort(files.begin(), files.end());
  std::vector<json> runs;
  for (const fs::path& f : files) runs.push_back(json::parse(read_text(f)));
  std::stable_sort(runs.begin(), runs.end(), [](const json& a, const json& b) {
    return std::pair(p_of(a), seed_of(a)) < std::pair(p_of(b), seed_of(b));
  });
  return runs;
}

void write_tables(const fs::path& dir, std::string_view mode, const std::vector<json>& runs,
                  const std::vector<double>& sweep, ExperimentSummary& summary) {
  summary.runs.clear();
  for (const json& run : runs) summary.runs.push_back(summary_from_json(run));
  summary.rows = aggregate(summary.runs);
  const std::string m(mode);
  const fs::path agg = dir / ("aggregate_" + m + ".csv");
  const fs::path win = dir / ("per_window_" + m + ".csv");
  const fs::path swp = dir / ("tau_sweep_" + m + ".csv");
  aggregate_csv(summary.rows).save(agg);
  per_window_csv(runs).save(win);
  tau_sweep_csv(runs, sweep).save(swp);
  summary.written.insert(summary.written.end(), {agg, win, swp});
  for (const fs::path& p : emit_plot_data(runs, dir / "plots" / m)) summary.written.push_back(p);
}

ExperimentSummary run_pipeline(const ExperimentConfig& cfg) {
  const bool sngr = cfg.mode == ExperimentMode::Sngr;
  const std::string mode(to_string(cfg.mode));
  const SngrOptions opts =
      options_for(cfg, sngr ? RefineMode::NestedSampling : RefineMode::TriggerOnly, *cfg.tau);
  std::vector<ScenarioBundle> bundles = scenarios_for(cfg);
  std::vector<json> runs(bundles.size());
  parallel_for(bundles.size(), cfg.jobs, [&](std::size_t i) {
    runs[i] = to_json(run_sngr(bundles[i], opts), mode, cfg.timing);
  });

  ExperimentSummary summary;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const std::string stem = run_stem(bundles[i].params.p_noise, bundles[i].params.seed);
    const fs::path scen = cfg.output_dir / "scenarios" / (stem + ".json");
    const fs::path run = cfg.output_dir / "runs" / (mode + "_" + stem + ".json");
    save_bundle(scen, bundles[i]);
    write_text(run, runs[i].dump(1) + "\n");
    summary.written.insert(summary.written.end(), {scen, run});
  }
  write_tables(cfg.output_dir, mode, runs, cfg.sweep_taus, summary);
  return summary;
}

ExperimentSummary run_calibration(const ExperimentConfig& cfg) {
  const SngrOptions opts =
      options_for(cfg, RefineMode::TriggerOnly, std::numeric_limits<double>::infinity());
  std::vector<ScenarioBundle> bundles = scenarios_for(cfg);
  std::vector<RunReport> reports(bundles.size());
  parallel_for(bundles.size(), cfg.jobs,
               [&](std::size_t i) { reports[i] = run_sngr(bundles[i], opts); });

  std::vector<double> clean, noisy;
  std::vector<bool> labels;
  CsvWriter csv({"p", "seed", "window", "score", "failed"});
  for (const RunReport& r : reports) {
    for (const WindowReport& w : r.windows) {
      csv.cell(r.params.p_noise).cell(r.params.seed).cell(w.start).cell(w.score).cell(w.failed);
      csv.end_row();
      if (r.params.p_noise == 0.0) {
        clean.push_back(w.score);
      } else {
        noisy.push_back(w.score);
        labels.push_back(w.failed);
      }
    }
  }
  const Calibration cal = calibrate_tau(clean, noisy, labels);
  TauFile tau;
  tau.tau = cal.tau;
  tau.precision = cal.precision;
  tau.recall = cal.recall;
  tau.clean_max = *std::max_element(clean.begin(), clean.end());
  for (double p : cfg.noise_levels)
    if (p > 0.0) tau.calibration_noise.push_back(p);
  tau.seeds = cfg.seeds;

  ExperimentSummary summary;
  summary.tau = tau;
  const fs::path tau_path = cfg.output_dir / "tau.json";
  const fs::path scores_path = cfg.output_dir / "calibration_scores.csv";
  write_text(tau_path, to_json(tau).dump(1) + "\n");
  csv.save(scores_path);
  summary.written = {tau_path, scores_path};
  return summary;
}

ExperimentSummary run_bimodal_stage(const ExperimentConfig& cfg) {
  ExperimentSummary summary;
  summary.bimodal = run_bimodal(cfg.sampler, cfg.effective_inflation());
  const fs::path report = cfg.output_dir / "bimodal.json";
  write_text(report, to_json(*summary.bimodal, cfg.timing).dump(1) + "\n");
  summary.written.push_back(report);
  for (const fs::path& p : emit_bimodal_plot_data(*summary.bimodal, cfg.output_dir / "plots" / "bimodal"))
    summary.written.push_back(p);
  return summary;
}

ExperimentSummary run_report(const ExperimentConfig& cfg) {
  ExperimentSummary summary;
  for (ExperimentMode m : {ExperimentMode::Baseline, ExperimentMode::Sngr}) {
    const std::vector<json> runs = load_runs(cfg.output_dir, to_string(m));
    if (runs.empty()) continue;
    ExperimentSummary part;
    write_tables(cfg.output_dir, to_string(m), runs, cfg.sweep_taus, part);
    summary.runs.insert(summary.runs.end(), part.runs.begin(), part.runs.end());
    summary.rows.insert(summary.rows.end(), part.rows.begin(), part.rows.end());
    summary.written.insert(summary.written.end(), part.written.begin(), part.written.end());
  }
  if (summary.written.empty())
    throw std::runtime_error("no run reports under " + (cfg.output_dir / "runs").string());
  return summary;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  switch (cfg.mode) {
    case ExperimentMode::Calibrate: return run_calibration(cfg);
    case ExperimentMode::Baseline:
    case ExperimentMode::Sngr: return run_pipeline(cfg);
    case ExperimentMode::Bimodal: return run_bimodal_stage(cfg);
    case ExperimentMode::Report: return run_report(cfg);
  }
  throw std::logic_error("unhandled mode");
}

}  // namespace sngr
