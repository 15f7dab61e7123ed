#include "sngr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace sngr {

using nlohmann::json;

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, res.ptr);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw std::invalid_argument("csv header must not be empty");
  for (const std::string& h : header) cell(h);
  end_row();
  rows_ = 0;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  if (current_ == columns_) throw std::logic_error("csv row has too many cells");
  if (current_ > 0) out_ += ',';
  out_ += csv_escape(text);
  ++current_;
  return *this;
}

CsvWriter& CsvWriter::cell(double value) { return cell(std::string_view(format_double(value))); }

CsvWriter& CsvWriter::cell(long long value) { return cell(std::string_view(std::to_string(value))); }

CsvWriter& CsvWriter::cell(const std::optional<double>& value) {
  return value ? cell(*value) : cell(std::string_view());
}

void CsvWriter::end_row() {
  if (current_ != columns_) throw std::logic_error("csv row has too few cells");
  out_ += "\r\n";
  current_ = 0;
  ++rows_;
}

void CsvWriter::save(const std::filesystem::path& path) const {
  if (current_ != 0) throw std::logic_error("csv has an unfinished row");
  write_text(path, out_);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

json pose_json(const Pose2d& p) { return json::array({p.x(), p.y(), p.theta()}); }
json point_json(const Point2d& p) {
  if (!p.allFinite()) return json::array({nullptr, nullptr});
  return json::array({p.x(), p.y()});
}

Pose2d pose_from(const json& j) {
  return Pose2d(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}
Point2d point_from(const json& j) { return Point2d(j.at(0).get<double>(), j.at(1).get<double>()); }

void check_version(const json& j, std::string_view what) {
  const int v = j.at("version").get<int>();
  if (v != kSchemaVersion)
    throw std::runtime_error(std::string(what) + " schema version " + std::to_string(v) +
                             " is not supported");
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

json to_json(const ScenarioParams& p) {
  return json{{"pose_count", p.pose_count},   {"radius", p.radius},
              {"landmark_count", p.landmark_count}, {"landmark_box", p.landmark_box},
              {"sigma_t", p.sigma_t},         {"sigma_rot", p.sigma_rot},
              {"sigma_range", p.sigma_range}, {"p_noise", p.p_noise},
              {"seed", p.seed}};
}

ScenarioParams scenario_params_from_json(const json& j) {
  ScenarioParams p;
  p.pose_count = j.at("pose_count").get<int>();
  p.radius = j.at("radius").get<double>();
  p.landmark_count = j.at("landmark_count").get<int>();
  p.landmark_box = j.at("landmark_box").get<double>();
  p.sigma_t = j.at("sigma_t").get<double>();
  p.sigma_rot = j.at("sigma_rot").get<double>();
  p.sigma_range = j.at("sigma_range").get<double>();
  p.p_noise = j.at("p_noise").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.validate();
  return p;
}

json to_json(const ScenarioBundle& b) {
  json j{{"version", kSchemaVersion}, {"kind", "scenario"}, {"params", to_json(b.params)}};
  json& gt = j["gt_poses"] = json::array();
  for (const Pose2d& p : b.gt_poses) gt.push_back(pose_json(p));
  json& lm = j["gt_landmarks"] = json::array();
  for (const Point2d& p : b.gt_landmarks) lm.push_back(point_json(p));
  json& od = j["odometry"] = json::array();
  for (const Pose2d& p : b.odometry) od.push_back(pose_json(p));
  json& rg = j["ranges"] = json::array();
  for (const RangeMeasurement& m : b.ranges)
    rg.push_back(json{{"t", m.t}, {"reported_k", m.reported_k}, {"true_k", m.true_k}, {"z", m.z}});
  return j;
}

ScenarioBundle bundle_from_json(const json& j) {
  check_version(j, "scenario");
  ScenarioBundle b;
  b.params = scenario_params_from_json(j.at("params"));
  for (const json& p : j.at("gt_poses")) b.gt_poses.push_back(pose_from(p));
  for (const json& p : j.at("gt_landmarks")) b.gt_landmarks.push_back(point_from(p));
  for (const json& p : j.at("odometry")) b.odometry.push_back(pose_from(p));
  for (const json& m : j.at("ranges")) {
    RangeMeasurement r;
    r.t = m.at("t").get<int>();
    r.reported_k = m.at("reported_k").get<int>();
    r.true_k = m.at("true_k").get<int>();
    r.z = m.at("z").get<double>();
    b.ranges.push_back(r);
  }
  const auto T = static_cast<std::size_t>(b.params.pose_count);
  const auto K = static_cast<std::size_t>(b.params.landmark_count);
  if (b.gt_poses.size() != T || b.odometry.size() + 1 != T || b.gt_landmarks.size() != K)
    throw std::runtime_error("scenario arrays do not match its parameters");
  int last_t = 0;
  for (const RangeMeasurement& r : b.ranges) {
    if (r.t < last_t || r.t >= b.params.pose_count || r.reported_k < 0 ||
        r.reported_k >= b.params.landmark_count || r.true_k < 0 ||
        r.true_k >= b.params.landmark_count)
      throw std::runtime_error("scenario range row out of bounds or out of order");
    last_t = r.t;
  }
  return b;
}

void save_bundle(const std::filesystem::path& path, const ScenarioBundle& bundle) {
  write_text(path, to_json(bundle).dump(1) + "\n");
}

ScenarioBundle load_bundle(const std::filesystem::path& path) {
  return bundle_from_json(json::parse(read_text(path)));
}

json to_json(const RunReport& r, std::string_view mode, bool timing) {
  auto secs = [&](double s) { return timing ? s : 0.0; };
  const SngrOptions& o = r.options;
  json j{{"version", kSchemaVersion}, {"kind", "run"}, {"mode", mode}};
  j["params"] = to_json(r.params);
  j["options"] = json{{"tau", o.tau},
                      {"inflation", o.inflation},
                      {"n_live", o.sampler.n_live},
                      {"n_walks", o.sampler.n_walks ? json(*o.sampler.n_walks) : json(nullptr)},
                      {"dlogz", o.sampler.dlogz_stop},
                      {"sampler_seed", o.sampler.seed},
                      {"window_size", o.window_size},
                      {"failure_epsilon", o.failure_epsilon}};
  j["metrics"] = json{{"rmse", r.rmse},
                      {"solver_rmse", r.solver_rmse},
                      {"landmark_rmse", r.landmark_rmse},
                      {"mean_nees", r.mean_nees},
                      {"solver_mean_nees", r.solver_mean_nees},
                      {"precision", optional_json(r.trigger_quality.precision)},
                      {"recall", optional_json(r.trigger_quality.recall)},
                      {"true_positives", r.trigger_quality.true_positives},
                      {"false_positives", r.trigger_quality.false_positives},
                      {"false_negatives", r.trigger_quality.false_negatives},
                      {"windows", r.windows.size()},
                      {"triggered", r.triggered},
                      {"failed", r.failed},
                      {"accepted", r.accepted},
                      {"sampler_invocations", r.sampler_invocations},
                      {"solver_seconds", secs(r.solver_seconds)},
                      {"refine_seconds", secs(r.refine_seconds)},
                      {"refine_wall_seconds", secs(r.refine_wall_seconds)},
                      {"per_window_seconds", secs(r.per_window_seconds)},
                      {"exhaustive_seconds_estimate", secs(r.exhaustive_seconds)}};
  json poses = json::array();
  for (std::size_t t = 0; t < r.poses.size(); ++t) {
    const Eigen::Matrix2d& P = r.position_cov[t];
    poses.push_back(json{{"t", t},
                         {"gt", pose_json(r.gt_poses[t])},
                         {"solver", pose_json(r.solver_poses[t])},
                         {"estimate", pose_json(r.poses[t])},
                         {"position_cov", json::array({P(0, 0), P(0, 1), P(1, 1)})},
                         {"nees", r.nees[t]},
                         {"solver_nees", r.solver_nees[t]}});
  }
  j["poses"] = std::move(poses);
  json lms = json::array();
  for (std::size_t k = 0; k < r.landmarks.size(); ++k)
    lms.push_back(json{{"k", k}, {"gt", point_json(r.gt_landmarks[k])},
                       {"estimate", point_json(r.landmarks[k])}});
  j["landmarks"] = std::move(lms);
  json ws = json::array();
  for (const WindowReport& w : r.windows) {
    json e{{"start", w.start},     {"score", w.score},     {"triggered", w.triggered},
           {"failed", w.failed},   {"refined", w.refined}, {"accepted", w.accepted},
           {"seconds", secs(w.seconds)}};
    if (w.refined) {
      e["sampler_converged"] = w.sampler_converged;
      e["log_evidence"] = w.log_evidence;
      e["log_evidence_err"] = w.log_evidence_err;
      e["ess"] = w.ess;
      e["samples"] = w.samples;
      e["map_ll"] = w.map_ll;
      e["candidate_ll"] = w.candidate_ll;
      e["delta_log_p"] = w.delta_log_p;
      e["max_shift"] = w.max_shift;
    }
    if (w.noop_mean_log_weight) e["noop_mean_log_weight"] = *w.noop_mean_log_weight;
    ws.push_back(std::move(e));
  }
  j["windows"] = std::move(ws);
  return j;
}

json to_json(const TauFile& t) {
  return json{{"version", kSchemaVersion},
              {"kind", "tau"},
              {"tau", t.tau},
              {"precision", optional_json(t.precision)},
              {"recall", optional_json(t.recall)},
              {"clean_max", t.clean_max},
              {"calibration_noise", t.calibration_noise},
              {"seeds", t.seeds}};
}

TauFile tau_from_json(const json& j) {
  check_version(j, "tau");
  TauFile t;
  t.tau = j.at("tau").get<double>();
  t.precision = optional_from(j.at("precision"));
  t.recall = optional_from(j.at("recall"));
  t.clean_max = j.at("clean_max").get<double>();
  t.calibration_noise = j.at("calibration_noise").get<std::vector<double>>();
  t.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  return t;
}

double parse_tau_argument(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec == std::errc() && res.ptr == end) return value;
  if (!std::filesystem::exists(text))
    throw std::invalid_argument("--tau is neither a number nor an existing tau file: " + text);
  return tau_from_json(json::parse(read_text(text))).tau;
}

}  // namespace sngr
