#pragma once

#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sngr/refine.hpp"
#include "sngr/scenario.hpp"
#include "sngr/trigger.hpp"

namespace sngr {

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// RFC-4180 CSV: fields are quoted when they contain a comma, quote or
/// line break; rows end in CRLF.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(std::string_view text);
  CsvWriter& cell(const char* text) { return cell(std::string_view(text)); }
  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::uint64_t value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(bool value) { return cell(static_cast<long long>(value ? 1 : 0)); }
  CsvWriter& cell(const std::optional<double>& value);
  void end_row();

  std::size_t rows() const { return rows_; }
  const std::string& str() const { return out_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::size_t current_ = 0;
  std::size_t rows_ = 0;
  std::string out_;
};

std::string csv_escape(std::string_view field);

/// Writes text atomically enough for our purposes: to a sibling temp file,
/// then renamed over the target. Parent directories are created.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

nlohmann::json to_json(const ScenarioParams& params);
ScenarioParams scenario_params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioBundle& bundle);
ScenarioBundle bundle_from_json(const nlohmann::json& j);

void save_bundle(const std::filesystem::path& path, const ScenarioBundle& bundle);
ScenarioBundle load_bundle(const std::filesystem::path& path);

/// Full run report. `timing = false` writes every duration as 0 so reruns
/// are byte-identical.
nlohmann::json to_json(const RunReport& report, std::string_view mode, bool timing = true);

struct TauFile {
  double tau = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  double clean_max = 0.0;
  std::vector<double> calibration_noise;
  std::vector<std::uint64_t> seeds;
};

nlohmann::json to_json(const TauFile& tau);
TauFile tau_from_json(const nlohmann::json& j);

/// Accepts either a number or the path of a tau file.
double parse_tau_argument(const std::string& text);

}  // namespace sngr
