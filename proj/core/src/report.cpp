#include "iomlab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>

#include "iomlab/error.hpp"

namespace iomlab {

namespace {

// Neumaier compensated summation.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

nlohmann::json stats_json(const ScoreStats& s) {
  return {{"min", s.min}, {"avg", s.avg}, {"max", s.max},
          {"stddev", s.stddev}, {"count", s.count}};
}

ScoreStats stats_from(const nlohmann::json& j) {
  ScoreStats s;
  s.min = j.at("min").get<double>();
  s.avg = j.at("avg").get<double>();
  s.max = j.at("max").get<double>();
  s.stddev = j.at("stddev").get<double>();
  s.count = j.at("count").get<std::size_t>();
  return s;
}

std::string number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) fail(ErrorKind::InvalidInput, "report: non-finite " + what);
}

}  // namespace

ScoreStats ScoreStats::of(std::span<const double> values) {
  require(!values.empty(), ErrorKind::InsufficientData, "statistics of an empty sample");
  ScoreStats s;
  s.count = values.size();
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  Accumulator sum;
  for (double v : values) sum.add(v);
  s.avg = std::clamp(sum.value() / static_cast<double>(s.count), s.min, s.max);
  if (s.count > 1) {
    Accumulator sq;
    for (double v : values) sq.add((v - s.avg) * (v - s.avg));
    s.stddev = std::sqrt(sq.value() / static_cast<double>(s.count - 1));
  }
  return s;
}

const ReportColumn& ExperimentReport::column(const std::string& label) const {
  for (const auto& c : columns) {
    if (c.label == label) return c;
  }
  fail(ErrorKind::InvalidInput, "report has no column '" + label + "'");
}

void ExperimentReport::validate() const {
  require(!columns.empty(), ErrorKind::InsufficientData, "report without columns");
  for (const auto& c : columns) {
    if (c.completed == 0) {
      fail(ErrorKind::InsufficientData,
           "report column '" + c.label + "' has no completed trial");
    }
    for (const auto& [name, rate] : c.rates) {
      if (!(rate >= 0.0 && rate <= 1.0)) {
        fail(ErrorKind::InvalidInput, "report: rate " + name + " outside [0, 1]");
      }
    }
    for (const auto& [name, v] : c.advantage) require_finite(v, "advantage " + name);
    for (const auto& [name, v] : c.values) require_finite(v, "value " + name);
    for (const auto& [name, s] : c.stats) {
      require(s.count >= 1, ErrorKind::InsufficientData, "report: empty statistics");
      require_finite(s.min + s.avg + s.max + s.stddev, "statistics " + name);
    }
  }
  for (const auto& [name, b] : baselines) {
    require_finite(b.fmr + b.fnmr + b.eer + b.tau + b.tau_star, "baseline " + name);
  }
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["schema_version"] = report.schema_version;
  j["experiment"] = report.experiment;
  j["config"] = report.config;
  auto& baselines = j["baselines"] = nlohmann::json::object();
  for (const auto& [name, b] : report.baselines) {
    baselines[name] = {{"metric", b.metric},     {"tau", b.tau},
                       {"direction", b.direction}, {"fmr", b.fmr},
                       {"fnmr", b.fnmr},         {"eer", b.eer},
                       {"tau_star", b.tau_star}, {"genuine", stats_json(b.genuine)},
                       {"impostor", stats_json(b.impostor)}};
  }
  auto& columns = j["columns"] = nlohmann::json::array();
  for (const auto& c : report.columns) {
    nlohmann::json col;
    col["label"] = c.label;
    col["trials"] = c.trials;
    col["completed"] = c.completed;
    col["failures"] = c.failures;
    col["failure_rate"] = c.failure_rate();
    col["rates"] = c.rates;
    col["advantage"] = c.advantage;
    auto& stats = col["stats"] = nlohmann::json::object();
    for (const auto& [name, s] : c.stats) stats[name] = stats_json(s);
    col["values"] = c.values;
    col["failure_messages"] = c.failure_messages;
    columns.push_back(std::move(col));
  }
  return j;
}

ExperimentReport report_from_json(const nlohmann::json& j) {
  try {
    ExperimentReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion) {
      fail(ErrorKind::ParseError,
           "unsupported report schema version " + std::to_string(r.schema_version));
    }
    r.experiment = j.at("experiment").get<std::string>();
    r.config = j.at("config");
    for (const auto& [name, b] : j.at("baselines").items()) {
      Baseline base;
      base.metric = b.at("metric").get<std::string>();
      base.tau = b.at("tau").get<double>();
      base.direction = b.at("direction").get<std::string>();
      base.fmr = b.at("fmr").get<double>();
      base.fnmr = b.at("fnmr").get<double>();
      base.eer = b.at("eer").get<double>();
      base.tau_star = b.at("tau_star").get<double>();
      base.genuine = stats_from(b.at("genuine"));
      base.impostor = stats_from(b.at("impostor"));
      r.baselines.emplace(name, std::move(base));
    }
    for (const auto& col : j.at("columns")) {
      ReportColumn c;
      c.label = col.at("label").get<std::string>();
      c.trials = col.at("trials").get<std::size_t>();
      c.completed = col.at("completed").get<std::size_t>();
      c.failures = col.at("failures").get<std::size_t>();
      c.rates = col.at("rates").get<std::map<std::string, double>>();
      c.advantage = col.at("advantage").get<std::map<std::string, double>>();
      for (const auto& [name, s] : col.at("stats").items()) c.stats.emplace(name, stats_from(s));
      c.values = col.at("values").get<std::map<std::string, double>>();
      c.failure_messages = col.at("failure_messages").get<std::vector<std::string>>();
      r.columns.push_back(std::move(c));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("malformed report: ") + e.what());
  }
}

std::string to_csv_table(const ExperimentReport& report) {
  std::vector<std::string> rows;
  std::set<std::string> seen;
  auto add_row = [&](const std::string& name) {
    if (seen.insert(name).second) rows.push_back(name);
  };
  for (const auto& c : report.columns) {
    add_row("trials");
    add_row("failure_rate");
    for (const auto& [name, v] : c.rates) add_row(name);
    for (const auto& [name, v] : c.advantage) add_row("advantage." + name);
    for (const auto& [name, s] : c.stats) {
      add_row(name + ".min");
      add_row(name + ".avg");
      add_row(name + ".max");
    }
    for (const auto& [name, v] : c.values) add_row(name);
  }

  auto cell = [](const ReportColumn& c, const std::string& row) -> std::string {
    if (row == "trials") return std::to_string(c.trials);
    if (row == "failure_rate") return number(c.failure_rate());
    if (auto it = c.rates.find(row); it != c.rates.end()) return number(it->second);
    if (row.rfind("advantage.", 0) == 0) {
      if (auto it = c.advantage.find(row.substr(10)); it != c.advantage.end()) {
        return number(it->second);
      }
    }
    const auto dot = row.rfind('.');
    if (dot != std::string::npos) {
      if (auto it = c.stats.find(row.substr(0, dot)); it != c.stats.end()) {
        const auto field = row.substr(dot + 1);
        if (field == "min") return number(it->second.min);
        if (field == "avg") return number(it->second.avg);
        if (field == "max") return number(it->second.max);
      }
    }
    if (auto it = c.values.find(row); it != c.values.end()) return number(it->second);
    return {};
  };

  std::string out = "statistic";
  for (const auto& c : report.columns) out += "," + c.label;
  out += '\n';
  for (const auto& row : rows) {
    out += row;
    for (const auto& c : report.columns) out += "," + cell(c, row);
    out += '\n';
  }
  return out;
}

void emit_report(const ExperimentReport& report, std::ostream& out, ReportFormat format) {
  report.validate();
  if (format == ReportFormat::Json) {
    out << to_json(report).dump(2) << '\n';
  } else {
    out << to_csv_table(report);
  }
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path,
                 ReportFormat format) {
  report.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write report " + path.string());
  emit_report(report, out, format);
  if (!out) fail(ErrorKind::Io, "write failed for " + path.string());
}

ExperimentReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open report " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, "report " + path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

ExperimentReport combine_reports(std::span<const ExperimentReport> reports) {
  require(!reports.empty(), ErrorKind::InvalidInput, "nothing to combine");
  ExperimentReport out;
  out.experiment = reports.front().experiment;
  out.config = nlohmann::json::array();
  std::set<std::string> labels;
  for (std::size_t r = 0; r < reports.size(); ++r) {
    const auto& report = reports[r];
    require(report.experiment == out.experiment, ErrorKind::InvalidInput,
            "cannot combine reports of different experiments");
    out.config.push_back(report.config);
    for (const auto& [name, b] : report.baselines) out.baselines.emplace(name, b);
    for (auto c : report.columns) {
      if (!labels.insert(c.label).second) {
        c.label += "#" + std::to_string(r + 1);
        labels.insert(c.label);
      }
      out.columns.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace iomlab
