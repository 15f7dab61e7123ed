#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sngr/io.hpp"
#include "sngr/refine.hpp"
#include "sngr/sampler.hpp"

namespace sngr {

enum class ExperimentMode { Calibrate, Baseline, Sngr, Bimodal, Report };

std::string_view to_string(ExperimentMode mode);
ExperimentMode parse_mode(std::string_view name);

struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::Baseline;
  std::vector<double> noise_levels{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::optional<double> tau;
  NsConfig sampler;
  /// Defaults to 1 for the pipeline and 50 for the bimodal run.
  std::optional<double> inflation;
  std::filesystem::path output_dir = "out";
  /// (noise, seed) pairs run concurrently.
  int jobs = 1;
  /// When false every duration is written as 0.
  bool timing = true;
  /// Run on a stored bundle instead of generating scenarios.
  std::optional<std::filesystem::path> scenario_json;
  std::vector<double> sweep_taus{3.92, 3.96, 4.00};

  void validate() const;
  double effective_inflation() const;
};

/// Per-run numbers the aggregate tables are built from. Always read back
/// from the run JSON so tables can be regenerated from disk.
struct RunSummary {
  std::string mode;
  double p_noise = 0.0;
  std::uint64_t seed = 0;
  double tau = 0.0;
  double rmse = 0.0;
  double solver_rmse = 0.0;
  double mean_nees = 0.0;
  double solver_mean_nees = 0.0;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  int windows = 0;
  int triggered = 0;
  int failed = 0;
  int accepted = 0;
  double solver_seconds = 0.0;
  double refine_seconds = 0.0;
  double per_window_seconds = 0.0;
  double exhaustive_seconds = 0.0;
};

RunSummary summary_from_json(const nlohmann::json& run);

/// One table row per noise level. Counts and times are summed over seeds;
/// precision and recall pool the per-seed counts.
struct AggregateRow {
  double p_noise = 0.0;
  int runs = 0;
  double rmse_mean = 0.0;
  double rmse_std = 0.0;
  double nees = 0.0;
  double nees_median = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  int triggered = 0;
  int failed = 0;
  int accepted = 0;
  double refine_seconds = 0.0;
  double solver_seconds = 0.0;
  double exhaustive_seconds = 0.0;
};

std::vector<AggregateRow> aggregate(const std::vector<RunSummary>& runs);
CsvWriter aggregate_csv(const std::vector<AggregateRow>& rows);
CsvWriter per_window_csv(const std::vector<nlohmann::json>& runs);

/// Trigger counts when the stored scores are re-thresholded at each τ.
CsvWriter tau_sweep_csv(const std::vector<nlohmann::json>& runs, const std::vector<double>& taus);

/// Figure tables for a set of runs of one mode. Empty input yields
/// header-only files.
std::vector<std::filesystem::path> emit_plot_data(const std::vector<nlohmann::json>& runs,
                                                  const std::filesystem::path& dir);

struct BimodalReport {
  Point2d initial;
  double initial_ll = 0.0;
  Point2d map_estimate;
  double map_ll = 0.0;
  Point2d best;
  double best_ll = 0.0;
  /// Distance from the best sample to the nearer true mode.
  double best_mode_distance = 0.0;
  Point2d weighted_mean;
  double weighted_mean_ll = 0.0;
  double delta_log_p = 0.0;
  double sigma_y = 0.0;
  double bimodality = 0.0;
  double share_upper = 0.0;
  double share_lower = 0.0;
  double log_evidence = 0.0;
  double log_evidence_err = 0.0;
  double ess = 0.0;
  double inflation = 0.0;
  Eigen::Matrix2d prior_cov;
  /// Samples in world coordinates.
  WeightedSamples samples;
  double seconds = 0.0;
};

/// Two-anchor experiment: MAP from the midpoint, then nested sampling over
/// the landmark with prior N(MAP, c Σ). Σ comes from the graph plus a weak
/// landmark prior, since the midpoint information is singular along y.
BimodalReport run_bimodal(const NsConfig& cfg = {}, double inflation = 50.0,
                          double regularizer_sigma = 10.0);

nlohmann::json to_json(const BimodalReport& report, bool timing = true);
std::vector<std::filesystem::path> emit_bimodal_plot_data(const BimodalReport& report,
                                                          const std::filesystem::path& dir,
                                                          int bins = 80, double half_width = 4.0);

struct ExperimentSummary {
  std::vector<RunSummary> runs;
  std::vector<AggregateRow> rows;
  std::optional<TauFile> tau;
  std::optional<BimodalReport> bimodal;
  std::vector<std::filesystem::path> written;
};

/// Runs one stage and writes its files under cfg.output_dir.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

/// Scenario parameters for one (noise, seed) pair of the benchmark.
ScenarioParams benchmark_params(double p_noise, std::uint64_t seed);

std::string run_stem(double p_noise, std::uint64_t seed);

}  // namespace sngr
