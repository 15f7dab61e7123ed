#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sngr/experiment.hpp"

namespace {

void print_rows(const std::vector<sngr::AggregateRow>& rows) {
  std::printf("%5s %5s %9s %9s %10s %10s %6s %6s %5s %5s\n", "p", "runs", "rmse", "rmse_sd",
              "nees", "nees_med", "prec", "recall", "trig", "fail");
  for (const auto& r : rows) {
    auto opt = [](const std::optional<double>& v) {
      return v ? std::to_string(*v).substr(0, 5) : std::string("-");
    };
    std::printf("%5.2f %5d %9.3f %9.3f %10.2f %10.2f %6s %6s %5d %5d\n", r.p_noise, r.runs,
                r.rmse_mean, r.rmse_std, r.nees, r.nees_median, opt(r.precision).c_str(),
                opt(r.recall).c_str(), r.triggered, r.failed);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Selective nested-sampling refinement for range-only SLAM factor graphs"};
  app.require_subcommand(1);

  sngr::ExperimentConfig cfg;
  std::string tau_arg;
  int nlive = cfg.sampler.n_live;
  std::string out = cfg.output_dir.string();
  std::string scenario;
  bool no_timing = false;

  auto add_common = [&](CLI::App* sub, bool pipeline) {
    sub->add_option("--out", out, "Output directory")->capture_default_str();
    sub->add_option("--nlive", nlive, "Live points")->capture_default_str()->check(CLI::Range(2, 1000000));
    sub->add_option("--dlogz", cfg.sampler.dlogz_stop, "Remaining-evidence stopping tolerance")
        ->capture_default_str();
    sub->add_option("--c", cfg.inflation, "Prior covariance inflation (default 1, bimodal 50)");
    sub->add_flag("--no-timing", no_timing, "Write all durations as 0 for byte-identical reruns");
    if (!pipeline) return;
    sub->add_option("--seeds", cfg.seeds, "Scenario seeds")->capture_default_str();
    sub->add_option("--noise", cfg.noise_levels, "Wrong-association probabilities")
        ->capture_default_str();
    sub->add_option("--jobs", cfg.jobs, "Concurrent (noise, seed) runs")
        ->capture_default_str()->check(CLI::PositiveNumber);
  };

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Pick tau from clean (p = 0) and noisy runs; --noise defaults to 0 0.3");
  add_common(calibrate, true);
  for (const char* name : {"baseline", "sngr"}) {
    CLI::App* sub = app.add_subcommand(
        name, std::string(name) == "sngr" ? "Trigger and refine with nested sampling"
                                          : "Trigger only; the trajectory is the solver's");
    add_common(sub, true);
    sub->add_option("--tau", tau_arg, "Threshold value or tau file")->required();
    sub->add_option("--scenario-json", scenario, "Run on a stored scenario bundle")
        ->check(CLI::ExistingFile);
  }
  CLI::App* bimodal = app.add_subcommand("bimodal", "Two-anchor bimodal experiment");
  add_common(bimodal, false);
  CLI::App* report = app.add_subcommand("report", "Rebuild tables from stored run reports");
  report->add_option("--out", out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    cfg.mode = sngr::parse_mode(sub->get_name());
    if (sub == calibrate && calibrate->count("--noise") == 0) cfg.noise_levels = {0.0, 0.3};
    cfg.sampler.n_live = nlive;
    cfg.output_dir = out;
    cfg.timing = !no_timing;
    if (!tau_arg.empty()) cfg.tau = sngr::parse_tau_argument(tau_arg);
    if (!scenario.empty()) cfg.scenario_json = scenario;

    const sngr::ExperimentSummary s = sngr::run_experiment(cfg);
    if (s.tau) {
      std::printf("tau %.2f (clean max %.4f)", s.tau->tau, s.tau->clean_max);
      if (s.tau->precision) std::printf(" precision %.3f", *s.tau->precision);
      if (s.tau->recall) std::printf(" recall %.3f", *s.tau->recall);
      std::printf("\n");
    }
    if (s.bimodal) {
      const auto& b = *s.bimodal;
      std::printf("MAP (%.4f, %.4f) ll %.3f\n", b.map_estimate.x(), b.map_estimate.y(), b.map_ll);
      std::printf("best sample (%.4f, %.4f) ll %.3f, %.4f m from a mode\n", b.best.x(), b.best.y(),
                  b.best_ll, b.best_mode_distance);
      std::printf("delta log p %+.3f  sigma_y %.3f  BC %.3f  shares %.3f / %.3f\n", b.delta_log_p,
                  b.sigma_y, b.bimodality, b.share_upper, b.share_lower);
    }
    if (!s.rows.empty()) print_rows(s.rows);
    std::printf("wrote %zu files under %s\n", s.written.size(), cfg.output_dir.string().c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
