#pragma once

// Experiment reports and their JSON / CSV emission.
//
// JSON layout (schema_version 1):
//   {
//     "schema_version": 1,
//     "experiment": "<kind>",
//     "config": { ... full run configuration, including derived seeds ... },
//     "baselines": { "<rate>": {"metric", "tau", "direction", "fmr", "fnmr",
//                               "eer", "tau_star", "impostor": stats,
//                               "genuine": stats} },
//     "columns": [ { "label", "trials", "completed", "failures",
//                    "failure_rate", "rates": {..}, "advantage": {..},
//                    "stats": { "<name>": {"min","avg","max","stddev","count"} },
//                    "values": {..}, "failure_messages": [..] } ]
//   }
// A column is one configuration of the experiment (a leak count N, an
// objective case, ...). Every rate lies in [0, 1].

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace iomlab {

inline constexpr int kReportSchemaVersion = 1;

struct ScoreStats {
  double min = 0.0;
  double avg = 0.0;
  double max = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 when count == 1
  std::size_t count = 0;

  /// Throws InsufficientData on an empty sample. Sums are compensated, so
  /// the result does not depend on how the values were produced.
  static ScoreStats of(std::span<const double> values);

  bool operator==(const ScoreStats&) const = default;
};

struct Baseline {
  std::string metric;
  double tau = 0.0;
  std::string direction;  // "accept_below" or "accept_above"
  double fmr = 0.0;
  double fnmr = 0.0;
  double eer = 0.0;
  double tau_star = 0.0;
  ScoreStats genuine;
  ScoreStats impostor;

  bool operator==(const Baseline&) const = default;
};

struct ReportColumn {
  std::string label;
  std::size_t trials = 0;     // attempted
  std::size_t completed = 0;  // trials whose solve succeeded
  std::size_t failures = 0;
  std::map<std::string, double> rates;
  std::map<std::string, double> advantage;
  std::map<std::string, ScoreStats> stats;
  std::map<std::string, double> values;
  std::vector<std::string> failure_messages;

  double failure_rate() const noexcept {
    return trials == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(trials);
  }

  bool operator==(const ReportColumn&) const = default;
};

struct ExperimentReport {
  int schema_version = kReportSchemaVersion;
  std::string experiment;
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, Baseline> baselines;
  std::vector<ReportColumn> columns;

  /// Column by label; throws InvalidInput when absent.
  const ReportColumn& column(const std::string& label) const;

  /// Throws InsufficientData when a column has no completed trial, and
  /// InvalidInput when a rate is outside [0, 1] or a value is not finite.
  void validate() const;

  bool operator==(const ExperimentReport&) const = default;
};

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Rows are statistics (rates, advantages, stats as name.min / name.avg /
/// name.max, values), columns are the report columns.
std::string to_csv_table(const ExperimentReport& report);

enum class ReportFormat { Json, CsvTable };

/// Validates, then writes. Throws Io on write failure.
void emit_report(const ExperimentReport& report, const std::filesystem::path& path,
                 ReportFormat format);
void emit_report(const ExperimentReport& report, std::ostream& out, ReportFormat format);

ExperimentReport load_report(const std::filesystem::path& path);

/// Concatenates the columns of reports of the same experiment kind. Column
/// labels get the report index appended when they collide.
ExperimentReport combine_reports(std::span<const ExperimentReport> reports);

}  // namespace iomlab
