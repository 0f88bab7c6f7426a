#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "iomlab/dataset.hpp"
#include "iomlab/error.hpp"
#include "iomlab/eval.hpp"
#include "iomlab/grp.hpp"
#include "iomlab/random.hpp"
#include "iomlab/report.hpp"
#include "iomlab/urp.hpp"

namespace iomlab::cli {

namespace {

using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Unsupported:
      return kExitUsage;
    case ErrorKind::Infeasible:
    case ErrorKind::NumericalFailure:
      return kExitSolver;
    default:
      return kExitData;
  }
}

void error_line(std::ostream& err, const std::string& kind, const std::string& message,
                int code) {
  err << json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}.dump()
      << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, path + ": " + e.what());
  }
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorKind::Io, "cannot write " + path);
  file << text;
  if (!file) fail(ErrorKind::Io, "write failed for " + path);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  for (const auto& part : split_list(text)) {
    try {
      std::size_t used = 0;
      if constexpr (std::is_floating_point_v<T>) {
        values.push_back(static_cast<T>(std::stod(part, &used)));
      } else {
        values.push_back(static_cast<T>(std::stoull(part, &used)));
      }
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidInput, std::string("bad value in ") + what + ": " + part);
    }
  }
  require(!values.empty(), ErrorKind::InvalidInput, "empty list");
  return values;
}

// ---------------------------------------------------------------------------
// Shared option groups

struct CorpusOptions {
  std::string path;
  std::size_t users = 100;
  std::size_t samples = 5;
  std::size_t n = 299;
  double lo = kFeatureRange.first;
  double hi = kFeatureRange.second;
  double noise = 0.02;
  std::optional<std::uint64_t> corpus_seed;

  void add(CLI::App& app) {
    app.add_option("--corpus", path, "Feature corpus CSV (default: synthetic corpus)");
    app.add_option("--users", users, "Synthetic corpus: number of users");
    app.add_option("--samples", samples, "Synthetic corpus: samples per user");
    app.add_option("--n", n, "Synthetic corpus: feature length");
    app.add_option("--lo", lo, "Synthetic corpus: lower end of the feature range");
    app.add_option("--hi", hi, "Synthetic corpus: upper end of the feature range");
    app.add_option("--noise", noise, "Synthetic corpus: intra-user noise sigma");
    app.add_option("--corpus-seed", corpus_seed, "Synthetic corpus seed (default: --seed)");
  }

  // Flags win over the config file's "corpus" object.
  void merge_config(const json& j, const CLI::App& app) {
    if (!j.is_object()) return;
    if (j.contains("path") && app.count("--corpus") == 0) path = j.at("path").get<std::string>();
    if (!j.contains("synth")) return;
    const auto& s = j.at("synth");
    if (app.count("--users") == 0) users = s.value("users", users);
    if (app.count("--samples") == 0) samples = s.value("samples_per_user", samples);
    if (app.count("--n") == 0) n = s.value("n", n);
    if (app.count("--noise") == 0) noise = s.value("noise_sigma", noise);
    if (s.contains("range")) {
      const auto r = s.at("range").get<std::vector<double>>();
      if (r.size() == 2) {
        if (app.count("--lo") == 0) lo = r[0];
        if (app.count("--hi") == 0) hi = r[1];
      }
    }
    if (s.contains("seed") && app.count("--corpus-seed") == 0) {
      corpus_seed = s.at("seed").get<std::uint64_t>();
    }
  }

  SynthSpec spec(std::uint64_t seed) const {
    SynthSpec s;
    s.seed = corpus_seed.value_or(seed);
    s.users = users;
    s.samples_per_user = samples;
    s.n = n;
    s.range = {lo, hi};
    s.noise_sigma = noise;
    return s;
  }

  Corpus load(std::uint64_t seed) const {
    return path.empty() ? synth_corpus(spec(seed)) : load_corpus(path);
  }

  json describe(std::uint64_t seed) const {
    if (!path.empty()) return {{"path", path}};
    const auto s = spec(seed);
    return {{"synth", {{"seed", s.seed}, {"users", s.users}, {"samples_per_user", s.samples_per_user},
                       {"n", s.n}, {"range", {s.range.first, s.range.second}},
                       {"noise_sigma", s.noise_sigma}}}};
  }
};

struct SchemeOptions {
  std::size_t k = 16;
  std::size_t m = 300;
  std::size_t p = 1;
  double tau = 0.06;

  void add(CLI::App& app) {
    app.add_option("--k", k, "Window size k");
    app.add_option("--m", m, "Number of windows m");
    app.add_option("--p", p, "URP: permutations per window");
    app.add_option("--tau", tau, "Template acceptance threshold");
  }
};

// ---------------------------------------------------------------------------
// Template files: user_id,sample_id,seed,h1,...,hm

struct TemplateRow {
  std::string user_id;
  std::string sample_id;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> indices;
};

std::string write_templates(const std::vector<TemplateRow>& rows) {
  std::string text = "user_id,sample_id,seed";
  const std::size_t m = rows.empty() ? 0 : rows.front().indices.size();
  for (std::size_t i = 1; i <= m; ++i) text += ",h" + std::to_string(i);
  text += '\n';
  for (const auto& r : rows) {
    text += r.user_id + "," + r.sample_id + "," + std::to_string(r.seed);
    for (auto v : r.indices) text += "," + std::to_string(v);
    text += '\n';
  }
  return text;
}

std::vector<TemplateRow> read_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open template file " + path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) fail(ErrorKind::ParseError, path + ": line 1: empty file");
  const auto header = split_list(line);
  if (header.size() < 4 || header[0] != "user_id" || header[1] != "sample_id" ||
      header[2] != "seed") {
    fail(ErrorKind::ParseError, path + ": line 1: header must be user_id,sample_id,seed,h1,...");
  }
  const std::size_t m = header.size() - 3;
  std::vector<TemplateRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_list(line);
    if (fields.size() != m + 3) {
      fail(ErrorKind::DimensionError,
           path + ": line " + std::to_string(line_no) + ": expected " + std::to_string(m) +
               " template entries");
    }
    TemplateRow row;
    row.user_id = fields[0];
    row.sample_id = fields[1];
    try {
      row.seed = std::stoull(fields[2]);
      for (std::size_t i = 0; i < m; ++i) {
        row.indices.push_back(static_cast<std::uint32_t>(std::stoul(fields[3 + i])));
      }
    } catch (const std::exception&) {
      fail(ErrorKind::ParseError,
           path + ": line " + std::to_string(line_no) + ": not an unsigned integer");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorKind::ParseError, path + ": no template rows");
  return rows;
}

std::size_t largest_index(const std::vector<TemplateRow>& rows) {
  std::uint32_t k = 1;
  for (const auto& r : rows) {
    for (auto v : r.indices) k = std::max(k, v);
  }
  return k;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Context {
  std::ostream& out;
  std::ostream& err;
};

void log_done(Context& ctx, const std::string& command,
              std::chrono::steady_clock::time_point start) {
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ctx.err << json{{"event", "finished"}, {"command", command}, {"seconds", seconds}}.dump()
          << '\n';
}

struct SynthCommand {
  CorpusOptions corpus;
  std::uint64_t seed = 1;
  std::string out_path;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("synth", "Generate a synthetic feature corpus");
    corpus.add(*app);
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--out", out_path, "Output CSV (default: stdout)");
    command = app;
  }

  int run(Context& ctx) const {
    require(corpus.path.empty(), ErrorKind::InvalidInput, "synth does not read --corpus");
    const auto c = synth_corpus(corpus.spec(seed));
    std::ostringstream text;
    write_corpus(text, c);
    write_output(out_path, text.str(), ctx.out);
    return kExitOk;
  }

  CLI::App* command = nullptr;
};

struct EnrollCommand {
  CorpusOptions corpus;
  SchemeOptions scheme;
  std::string scheme_name = "grp";
  std::uint64_t seed = 1;
  std::string out_path;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("enroll", "Transform every corpus sample into a template");
    corpus.add(*app);
    scheme.add(*app);
    app->add_option("--scheme", scheme_name, "grp or urp")->check(CLI::IsMember({"grp", "urp"}));
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--out", out_path, "Output template CSV (default: stdout)");
    command = app;
  }

  int run(Context& ctx) const {
    const auto c = corpus.load(seed);
    SchemeParams params{c.n, scheme.k, scheme.m, scheme.p, scheme.tau};
    params.validate();
    std::vector<TemplateRow> rows;
    for (std::size_t u = 0; u < c.users.size(); ++u) {
      const auto& user = c.users[u];
      for (std::size_t s = 0; s < user.samples.size(); ++s) {
        const auto token = derive_seed(seed, Stream::Enrollment, u, s + 1);
        const Template t = scheme_name == "grp"
                               ? grp_transform(grp_gen_secret(token, params), user.samples[s])
                               : urp_transform(urp_gen_secret(token, params), user.samples[s]);
        rows.push_back({user.user_id, user.sample_ids[s], token,
                        {t.indices().begin(), t.indices().end()}});
      }
    }
    write_output(out_path, write_templates(rows), ctx.out);
    return kExitOk;
  }

  CLI::App* command = nullptr;
};

struct VerifyCommand {
  std::string a;
  std::string b;
  double tau = 0.06;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("verify", "Compare two template files row by row");
    app->add_option("--a", a, "First template CSV")->required();
    app->add_option("--b", b, "Second template CSV")->required();
    app->add_option("--tau", tau, "Acceptance threshold on the comparison score");
    command = app;
  }

  int run(Context& ctx) const {
    const auto left = read_templates(a);
    const auto right = read_templates(b);
    require(left.size() == right.size(), ErrorKind::DimensionError,
            "template files have different row counts");
    const std::size_t k = std::max(largest_index(left), largest_index(right));
    json rows = json::array();
    bool all = true;
    for (std::size_t i = 0; i < left.size(); ++i) {
      const Template u(left[i].indices, k);
      const Template w(right[i].indices, k);
      require(u.size() == w.size(), ErrorKind::DimensionError, "template lengths differ");
      const double score = comparison_score(u, w);
      const bool accepted = verify_template(u, w, tau);
      all = all && accepted;
      rows.push_back({{"a", left[i].user_id + "/" + left[i].sample_id},
                      {"b", right[i].user_id + "/" + right[i].sample_id},
                      {"score", score},
                      {"accepted", accepted}});
    }
    ctx.out << json{{"tau", tau}, {"accepted", all}, {"rows", rows}}.dump(2) << '\n';
    return kExitOk;
  }

  CLI::App* command = nullptr;
};

struct EvalCommand {
  CorpusOptions corpus;
  SchemeOptions scheme;
  std::string metric = "euclidean";
  std::string scheme_name = "grp";
  std::uint64_t seed = 1;
  std::optional<double> threshold;
  std::string out_path;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("eval", "FMR / FNMR / EER of a matcher on a corpus");
    corpus.add(*app);
    scheme.add(*app);
    app->add_option("--metric", metric, "euclidean, similarity or template")
        ->check(CLI::IsMember({"euclidean", "similarity", "template"}));
    app->add_option("--scheme", scheme_name, "grp or urp (template metric)")
        ->check(CLI::IsMember({"grp", "urp"}));
    app->add_option("--threshold", threshold,
                    "Decision threshold (default: 0.33, 0.13 or --tau by metric)");
    app->add_option("--seed", seed, "Master seed");
    app->add_option("--out", out_path, "Output JSON (default: stdout)");
    command = app;
  }

  int run(Context& ctx) const {
    const auto c = corpus.load(seed);
    PairMetric pm = PairMetric::euclidean();
    double t = threshold.value_or(FeatureThresholds{}.tau_euc);
    if (metric == "similarity") {
      pm = PairMetric::similarity();
      t = threshold.value_or(FeatureThresholds{}.tau_sim);
    } else if (metric == "template") {
      SchemeParams params{c.n, scheme.k, scheme.m, scheme.p, scheme.tau};
      params.validate();
      pm = PairMetric::template_rate(scheme_name == "grp" ? Scheme::Grp : Scheme::Urp, params,
                                     derive_seed(seed, Stream::Baseline));
      t = threshold.value_or(scheme.tau);
    }
    const auto dists = score_distributions(c, pm);
    const auto direction = direction_of(pm.kind);
    const auto rates = rates_at_threshold(dists, t, direction);
    const auto e = eer(dists, direction);
    const auto g = ScoreStats::of(dists.genuine);
    const auto i = ScoreStats::of(dists.impostor);
    auto stats = [](const ScoreStats& s) {
      return json{{"min", s.min}, {"avg", s.avg}, {"max", s.max},
                  {"stddev", s.stddev}, {"count", s.count}};
    };
    const json result{
        {"metric", metric},
        {"threshold", t},
        {"direction", direction == ScoreDirection::AcceptBelow ? "accept_below" : "accept_above"},
        {"fmr", rates.fmr},
        {"fnmr", rates.fnmr},
        {"eer", e.eer},
        {"tau_star", e.tau_star},
        {"genuine", stats(g)},
        {"impostor", stats(i)},
        {"corpus", corpus.describe(seed)},
        {"seed", seed},
    };
    write_output(out_path, result.dump(2) + "\n", ctx.out);
    return kExitOk;
  }

  CLI::App* command = nullptr;
};

struct AttackCommand {
  std::string kind;
  CorpusOptions corpus;
  SchemeOptions scheme;
  std::string config_path;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  std::size_t users = 0;
  std::size_t trials_per_user = 1;
  std::string leaks;
  std::string cases;
  std::string taus;
  double tau_sim = 0.13;
  double t_link = 0.0;
  std::size_t link_trials = 10000;
  double margin = kDefaultMargin;
  bool symmetric = false;
  double feas_tol = 0.0;
  double opt_tol = 0.0;
  int max_iter = 0;
  std::string out_path;
  std::string format = "json";

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("attack", "Run an attack experiment and emit its report");
    app->add_option("kind", kind, "Attack kind")
        ->required()
        ->check(CLI::IsMember({"grp-auth", "grp-ac", "grp-sc", "grp-rev", "grp-longlived",
                               "urp-auth", "urp-longlived", "link-grp", "link-urp"}));
    corpus.add(*app);
    scheme.add(*app);
    app->add_option("--config", config_path, "Run configuration JSON");
    app->add_option("--seed", seed, "Master seed; every other seed derives from it");
    app->add_option("--threads", threads, "Worker threads (results do not depend on it)");
    app->add_option("--max-users", users, "Evaluate only the first N users (0 = all)");
    app->add_option("--trials-per-user", trials_per_user, "Independent trials per user");
    app->add_option("--leaks", leaks, "Comma-separated leak counts N");
    app->add_option("--cases", cases, "Comma-separated reversibility objective cases 0..3");
    app->add_option("--taus", taus, "Comma-separated Euclidean thresholds");
    app->add_option("--tau-sim", tau_sim, "Similarity threshold");
    app->add_option("--t-link", t_link, "Linkability decision threshold");
    app->add_option("--link-trials", link_trials, "Linkability counting-script iterations");
    app->add_option("--margin", margin, "Strictness margin of the argmax constraints");
    app->add_flag("--symmetric", symmetric, "Apply the margin to every constraint row");
    app->add_option("--feas-tol", feas_tol, "Solver feasibility tolerance");
    app->add_option("--opt-tol", opt_tol, "Solver optimality tolerance");
    app->add_option("--max-iter", max_iter, "Solver iteration limit");
    app->add_option("--out", out_path, "Report path (default: stdout)");
    app->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    command = app;
  }

  ExperimentConfig build(json& corpus_config) const {
    ExperimentConfig cfg;
    const bool urp = kind == "urp-auth" || kind == "urp-longlived" || kind == "link-urp";
    if (urp) cfg.params = SchemeParams{299, 128, 600, 2, 0.11};
    if (kind == "link-urp") {
      cfg.link_scheme = Scheme::Urp;
      cfg.link_metric = LinkMetric::pearson(0.18);
    }
    if (kind == "grp-ac" || kind == "grp-sc") cfg.leaks = {2};
    if (kind == "grp-rev") {
      cfg.cases = {ObjectiveCase::None, ObjectiveCase::MinNorm, ObjectiveCase::CorpusMean,
                   ObjectiveCase::HeldOut};
    }

    if (!config_path.empty()) {
      const json j = read_json_file(config_path);
      cfg = config_from_json(j);
      if (j.contains("corpus")) corpus_config = j.at("corpus");
    }
    cfg.solver = [&] {
      auto s = cfg.solver;
      const auto env = opt::SolverSettings::from_env();
      const opt::SolverSettings defaults;
      if (env.feas_tol != defaults.feas_tol) s.feas_tol = env.feas_tol;
      if (env.opt_tol != defaults.opt_tol) s.opt_tol = env.opt_tol;
      if (env.max_iterations != defaults.max_iterations) s.max_iterations = env.max_iterations;
      return s;
    }();

    static const std::map<std::string, ExperimentKind> kinds{
        {"grp-auth", ExperimentKind::GrpAuth},
        {"grp-ac", ExperimentKind::GrpAuthMultiLeak},
        {"grp-sc", ExperimentKind::GrpAuthMultiLeak},
        {"grp-rev", ExperimentKind::GrpReversibility},
        {"grp-longlived", ExperimentKind::GrpLongLived},
        {"urp-auth", ExperimentKind::UrpAuth},
        {"urp-longlived", ExperimentKind::UrpLongLived},
        {"link-grp", ExperimentKind::Link},
        {"link-urp", ExperimentKind::Link},
    };
    cfg.kind = kinds.at(kind);
    if (kind == "grp-ac") cfg.strategy = LeakStrategy::AllConstraints;
    if (kind == "grp-sc") cfg.strategy = LeakStrategy::SelectedConstraints;
    if (kind == "link-grp") cfg.link_scheme = Scheme::Grp;
    if (kind == "link-urp") cfg.link_scheme = Scheme::Urp;

    const auto& app = *command;
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--k")) cfg.params.k = scheme.k;
    if (given("--m")) cfg.params.m = scheme.m;
    if (given("--p")) cfg.params.p = scheme.p;
    if (given("--tau")) cfg.params.tau = scheme.tau;
    if (given("--seed")) cfg.seed = seed;
    if (given("--threads")) cfg.threads = threads;
    if (given("--max-users")) cfg.max_users = users;
    if (given("--trials-per-user")) cfg.trials_per_user = trials_per_user;
    if (given("--leaks")) cfg.leaks = parse_list<std::size_t>(leaks, "--leaks");
    if (given("--cases")) {
      cfg.cases.clear();
      for (auto c : parse_list<std::size_t>(cases, "--cases")) {
        require(c <= 3, ErrorKind::InvalidInput, "objective cases are 0..3");
        cfg.cases.push_back(static_cast<ObjectiveCase>(c));
      }
    }
    if (given("--taus")) cfg.taus_euc = parse_list<double>(taus, "--taus");
    if (given("--tau-sim")) cfg.tau_sim = tau_sim;
    if (given("--t-link")) cfg.link_metric.threshold = t_link;
    if (given("--link-trials")) cfg.link_trials = link_trials;
    if (given("--margin")) cfg.margin = margin;
    if (given("--symmetric")) cfg.margin_mode = MarginMode::Symmetric;
    if (given("--feas-tol")) cfg.solver.feas_tol = feas_tol;
    if (given("--opt-tol")) cfg.solver.opt_tol = opt_tol;
    if (given("--max-iter")) cfg.solver.max_iterations = max_iter;
    if (cfg.kind == ExperimentKind::Link && cfg.cases.size() != 1) {
      cfg.cases = {ObjectiveCase::None};
    }
    return cfg;
  }

  int run(Context& ctx) {
    const auto start = std::chrono::steady_clock::now();
    json corpus_config;
    auto cfg = build(corpus_config);
    corpus.merge_config(corpus_config, *command);
    const auto c = corpus.load(cfg.seed);
    cfg.params.n = c.n;
    cfg.validate();

    auto report = run_experiment(cfg, c);
    report.config["corpus"] = corpus.describe(cfg.seed);
    report.config["attack"] = kind;
    for (const auto& col : report.columns) {
      if (col.completed == 0) {
        fail(ErrorKind::Infeasible,
             "every trial of column '" + col.label + "' failed: " +
                 (col.failure_messages.empty() ? std::string("no message")
                                               : col.failure_messages.front()));
      }
    }
    std::ostringstream text;
    emit_report(report, text, format == "json" ? ReportFormat::Json : ReportFormat::CsvTable);
    write_output(out_path, text.str(), ctx.out);
    log_done(ctx, "attack " + kind, start);
    return kExitOk;
  }

  CLI::App* command = nullptr;
};

struct ReportCommand {
  std::vector<std::string> inputs;
  std::string out_path;
  std::string format = "csv";

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("report", "Re-emit (and combine) saved JSON reports");
    app->add_option("--in", inputs, "Report JSON file (repeatable)")->required();
    app->add_option("--out", out_path, "Output path (default: stdout)");
    app->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    command = app;
  }

  int run(Context& ctx) const {
    std::vector<ExperimentReport> reports;
    for (const auto& path : inputs) reports.push_back(load_report(path));
    const auto combined = reports.size() == 1 ? reports.front() : combine_reports(reports);
    std::ostringstream text;
    emit_report(combined, text, format == "json" ? ReportFormat::Json : ReportFormat::CsvTable);
    write_output(out_path, text.str(), ctx.out);
    return kExitOk;
  }

  CLI::App* command = nullptr;
};

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"iomlab: stolen-token attacks on GRP-IoM and URP-IoM"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "iomlab 0.1.0");

  SynthCommand synth;
  EnrollCommand enroll;
  VerifyCommand verify;
  EvalCommand evaluate;
  AttackCommand attack;
  ReportCommand report;
  synth.add(app);
  enroll.add(app);
  verify.add(app);
  evaluate.add(app);
  attack.add(app);
  report.add(app);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("iomlab");

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_line(err, "UsageError", e.what(), kExitUsage);
    return kExitUsage;
  }

  Context ctx{out, err};
  try {
    if (synth.command->parsed()) return synth.run(ctx);
    if (enroll.command->parsed()) return enroll.run(ctx);
    if (verify.command->parsed()) return verify.run(ctx);
    if (evaluate.command->parsed()) return evaluate.run(ctx);
    if (attack.command->parsed()) return attack.run(ctx);
    if (report.command->parsed()) return report.run(ctx);
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    error_line(err, std::string(to_string(e.kind())), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    error_line(err, "InternalError", e.what(), kExitData);
    return kExitData;
  }
  error_line(err, "UsageError", "no subcommand", kExitUsage);
  return kExitUsage;
}

}  // namespace iomlab::cli
