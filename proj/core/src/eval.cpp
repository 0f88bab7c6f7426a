#include "iomlab/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include "iomlab/error.hpp"
#include "iomlab/grp.hpp"
#include "iomlab/random.hpp"
#include "iomlab/urp.hpp"

namespace iomlab {

// ---------------------------------------------------------------------------
// Score distributions and rates

ScoreDistributions score_distributions(const Corpus& corpus, const PairMetric& metric) {
  corpus.validate();
  require(corpus.users.size() >= 2, ErrorKind::InsufficientData,
          "score distributions need at least two users");

  struct Item {
    std::size_t user;
    const FeatureVector* sample;
    Template tmpl;
  };
  std::vector<Item> items;
  for (std::size_t u = 0; u < corpus.users.size(); ++u) {
    for (const auto& s : corpus.users[u].samples) items.push_back({u, &s, {}});
  }

  if (metric.kind == PairMetric::Kind::TemplateHammingRate) {
    require(metric.params.n == corpus.n, ErrorKind::DimensionError,
            "template metric: params.n differs from the corpus feature length");
    if (metric.scheme == Scheme::Grp) {
      const auto secret = grp_gen_secret(metric.seed, metric.params);
      for (auto& it : items) it.tmpl = grp_transform(secret, *it.sample);
    } else {
      const auto secret = urp_gen_secret(metric.seed, metric.params);
      for (auto& it : items) it.tmpl = urp_transform(secret, *it.sample);
    }
  }

  auto score = [&](const Item& a, const Item& b) {
    switch (metric.kind) {
      case PairMetric::Kind::Euclidean:
        return euclidean_distance(*a.sample, *b.sample);
      case PairMetric::Kind::Similarity:
        return similarity_score(*a.sample, *b.sample);
      case PairMetric::Kind::TemplateHammingRate:
        return comparison_score(a.tmpl, b.tmpl);
    }
    fail(ErrorKind::InvalidInput, "unknown pair metric");
  };

  ScoreDistributions out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      auto& target = items[i].user == items[j].user ? out.genuine : out.impostor;
      target.push_back(score(items[i], items[j]));
    }
  }
  return out;
}

ScoreDirection direction_of(PairMetric::Kind kind) noexcept {
  return kind == PairMetric::Kind::Euclidean ? ScoreDirection::AcceptBelow
                                             : ScoreDirection::AcceptAbove;
}

Rates rates_at_threshold(const ScoreDistributions& dists, double tau,
                         ScoreDirection direction) {
  require(!dists.genuine.empty() && !dists.impostor.empty(), ErrorKind::InsufficientData,
          "rates need non-empty genuine and impostor scores");
  auto accepted = [&](double s) {
    return direction == ScoreDirection::AcceptBelow ? s <= tau : s >= tau;
  };
  std::size_t false_match = 0;
  for (double s : dists.impostor) false_match += accepted(s);
  std::size_t false_non_match = 0;
  for (double s : dists.genuine) false_non_match += !accepted(s);
  return {static_cast<double>(false_match) / static_cast<double>(dists.impostor.size()),
          static_cast<double>(false_non_match) / static_cast<double>(dists.genuine.size())};
}

EerResult eer(const ScoreDistributions& dists, ScoreDirection direction) {
  require(!dists.genuine.empty() && !dists.impostor.empty(), ErrorKind::InsufficientData,
          "EER needs non-empty genuine and impostor scores");
  const double sign = direction == ScoreDirection::AcceptBelow ? 1.0 : -1.0;
  std::vector<double> genuine;
  std::vector<double> impostor;
  for (double s : dists.genuine) genuine.push_back(sign * s);
  for (double s : dists.impostor) impostor.push_back(sign * s);
  std::sort(genuine.begin(), genuine.end());
  std::sort(impostor.begin(), impostor.end());

  std::vector<double> thresholds(genuine);
  thresholds.insert(thresholds.end(), impostor.begin(), impostor.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  const double ng = static_cast<double>(genuine.size());
  const double ni = static_cast<double>(impostor.size());
  // Accept below: FMR rises, FNMR falls with the threshold.
  auto at = [&](double t) {
    const auto fm = std::upper_bound(impostor.begin(), impostor.end(), t) - impostor.begin();
    const auto gm = std::upper_bound(genuine.begin(), genuine.end(), t) - genuine.begin();
    return Rates{static_cast<double>(fm) / ni, 1.0 - static_cast<double>(gm) / ng};
  };

  double prev_t = std::nextafter(thresholds.front(), -INFINITY);
  Rates prev{0.0, 1.0};
  for (double t : thresholds) {
    const Rates cur = at(t);
    const double d_prev = prev.fmr - prev.fnmr;
    const double d_cur = cur.fmr - cur.fnmr;
    if (d_cur >= 0.0) {
      const double w = d_prev == d_cur ? 1.0 : d_prev / (d_prev - d_cur);
      const double rate = prev.fmr + w * (cur.fmr - prev.fmr);
      return {rate, sign * (prev_t + w * (t - prev_t))};
    }
    prev = cur;
    prev_t = t;
  }
  // Unreachable: at the largest threshold FNMR is 0 and FMR is 1.
  return {prev.fmr, sign * prev_t};
}

// ---------------------------------------------------------------------------
// Parallel helper

void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Config

namespace {

const std::map<ExperimentKind, std::string>& kind_names() {
  static const std::map<ExperimentKind, std::string> names{
      {ExperimentKind::GrpAuth, "grp-auth"},
      {ExperimentKind::GrpAuthMultiLeak, "grp-multileak"},
      {ExperimentKind::GrpLongLived, "grp-longlived"},
      {ExperimentKind::GrpReversibility, "grp-rev"},
      {ExperimentKind::UrpAuth, "urp-auth"},
      {ExperimentKind::UrpLongLived, "urp-longlived"},
      {ExperimentKind::Link, "link"},
  };
  return names;
}

bool is_urp(ExperimentKind kind) {
  return kind == ExperimentKind::UrpAuth || kind == ExperimentKind::UrpLongLived;
}

}  // namespace

std::string to_string(ExperimentKind kind) { return kind_names().at(kind); }

ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (const auto& [kind, text] : kind_names()) {
    if (text == name) return kind;
  }
  fail(ErrorKind::InvalidInput, "unknown experiment kind '" + name + "'");
}

void ExperimentConfig::validate() const {
  params.validate();
  require(trials_per_user >= 1, ErrorKind::InvalidInput, "trials_per_user must be >= 1");
  require(threads >= 1, ErrorKind::InvalidInput, "threads must be >= 1");
  require(!leaks.empty(), ErrorKind::InvalidInput, "leaks must list at least one N");
  for (auto n : leaks) require(n >= 1, ErrorKind::InvalidInput, "leak counts must be >= 1");
  require(!cases.empty(), ErrorKind::InvalidInput, "cases must not be empty");
  for (double t : taus_euc) {
    require(t >= 0.0 && std::isfinite(t), ErrorKind::InvalidInput, "tau_euc must be >= 0");
  }
  require(std::isfinite(tau_sim), ErrorKind::InvalidInput, "tau_sim must be finite");
  require(link_trials >= 1, ErrorKind::InvalidInput, "link trials must be >= 1");
  require(margin >= 0.0, ErrorKind::InvalidInput, "margin must be >= 0");
  require(log_bounds.first < log_bounds.second, ErrorKind::InvalidInput,
          "log bounds must satisfy lo < hi");
  require(solver.feas_tol > 0.0 && solver.opt_tol > 0.0 && solver.max_iterations > 0,
          ErrorKind::InvalidInput, "solver tolerances must be positive");
  if (kind == ExperimentKind::GrpAuthMultiLeak && strategy == LeakStrategy::SelectedConstraints) {
    for (auto n : leaks) {
      require(n >= 2, ErrorKind::InvalidInput, "selected-constraint refinement needs N >= 2");
    }
  }
  const bool urp = is_urp(kind) || (kind == ExperimentKind::Link && link_scheme == Scheme::Urp);
  if (urp && params.p != 2) {
    fail(ErrorKind::Unsupported, "URP attacks are defined for p = 2 only");
  }
  if (kind == ExperimentKind::Link) {
    require(cases.size() == 1, ErrorKind::InvalidInput, "link takes a single objective case");
    require(cases.front() != ObjectiveCase::HeldOut, ErrorKind::InvalidInput,
            "link preimages cannot use the held-out objective");
    require(link_scheme == Scheme::Grp || cases.front() == ObjectiveCase::None,
            ErrorKind::InvalidInput, "URP preimages take no objective");
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json cases = nlohmann::json::array();
  for (auto oc : c.cases) cases.push_back(static_cast<int>(oc));
  return {
      {"kind", to_string(c.kind)},
      {"params", {{"n", c.params.n}, {"k", c.params.k}, {"m", c.params.m},
                  {"p", c.params.p}, {"tau", c.params.tau}}},
      {"seed", c.seed},
      {"max_users", c.max_users},
      {"trials_per_user", c.trials_per_user},
      {"leaks", c.leaks},
      {"strategy", c.strategy == LeakStrategy::AllConstraints ? "ac" : "sc"},
      {"cases", cases},
      {"taus_euc", c.taus_euc},
      {"tau_sim", c.tau_sim},
      {"link", {{"scheme", c.link_scheme == Scheme::Grp ? "grp" : "urp"},
                {"metric", c.link_metric.kind == LinkMetric::Kind::Beta ? "beta" : "pearson"},
                {"threshold", c.link_metric.threshold},
                {"trials", c.link_trials}}},
      {"margin", c.margin},
      {"margin_mode", c.margin_mode == MarginMode::TieBreak ? "tie-break" : "symmetric"},
      {"log_bounds", {c.log_bounds.first, c.log_bounds.second}},
      {"solver", {{"feas_tol", c.solver.feas_tol}, {"opt_tol", c.solver.opt_tol},
                  {"max_iterations", c.solver.max_iterations}}},
      {"threads", c.threads},
  };
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    if (j.contains("kind")) c.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("params")) {
      const auto& p = j.at("params");
      c.params.n = p.value("n", c.params.n);
      c.params.k = p.value("k", c.params.k);
      c.params.m = p.value("m", c.params.m);
      c.params.p = p.value("p", c.params.p);
      c.params.tau = p.value("tau", c.params.tau);
    }
    c.seed = j.value("seed", c.seed);
    c.max_users = j.value("max_users", c.max_users);
    c.trials_per_user = j.value("trials_per_user", c.trials_per_user);
    c.leaks = j.value("leaks", c.leaks);
    if (j.contains("strategy")) {
      const auto s = j.at("strategy").get<std::string>();
      if (s == "ac") {
        c.strategy = LeakStrategy::AllConstraints;
      } else if (s == "sc") {
        c.strategy = LeakStrategy::SelectedConstraints;
      } else {
        fail(ErrorKind::ParseError, "strategy must be 'ac' or 'sc'");
      }
    }
    if (j.contains("cases")) {
      c.cases.clear();
      for (int v : j.at("cases").get<std::vector<int>>()) {
        if (v < 0 || v > 3) fail(ErrorKind::ParseError, "objective cases are 0..3");
        c.cases.push_back(static_cast<ObjectiveCase>(v));
      }
    }
    c.taus_euc = j.value("taus_euc", c.taus_euc);
    c.tau_sim = j.value("tau_sim", c.tau_sim);
    if (j.contains("link")) {
      const auto& l = j.at("link");
      const auto scheme = l.value("scheme", std::string("grp"));
      if (scheme != "grp" && scheme != "urp") fail(ErrorKind::ParseError, "link scheme");
      c.link_scheme = scheme == "grp" ? Scheme::Grp : Scheme::Urp;
      const auto metric = l.value("metric", std::string("beta"));
      if (metric != "beta" && metric != "pearson") fail(ErrorKind::ParseError, "link metric");
      c.link_metric.kind = metric == "beta" ? LinkMetric::Kind::Beta : LinkMetric::Kind::Pearson;
      c.link_metric.threshold = l.value("threshold", c.link_metric.threshold);
      c.link_trials = l.value("trials", c.link_trials);
    }
    c.margin = j.value("margin", c.margin);
    if (j.contains("margin_mode")) {
      const auto mode = j.at("margin_mode").get<std::string>();
      if (mode != "tie-break" && mode != "symmetric") fail(ErrorKind::ParseError, "margin_mode");
      c.margin_mode = mode == "tie-break" ? MarginMode::TieBreak : MarginMode::Symmetric;
    }
    if (j.contains("log_bounds")) {
      const auto b = j.at("log_bounds").get<std::vector<double>>();
      if (b.size() != 2) fail(ErrorKind::ParseError, "log_bounds takes two numbers");
      c.log_bounds = {b[0], b[1]};
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      c.solver.feas_tol = s.value("feas_tol", c.solver.feas_tol);
      c.solver.opt_tol = s.value("opt_tol", c.solver.opt_tol);
      c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
    }
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::ParseError, std::string("bad experiment config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

constexpr std::uint64_t kTrialStride = 1000;
constexpr std::uint64_t kLinkPairsStream = 0x4C494E4B;  // sub-stream of Stream::Pairs
constexpr std::size_t kMaxFailureMessages = 10;

struct TrialKey {
  std::size_t user = 0;
  std::size_t trial = 0;
};

// One trial's measurements; `samples` become statistics, `flags` rates.
struct Outcome {
  bool ok = false;
  std::string error;
  std::vector<std::pair<std::string, double>> samples;
  std::vector<std::pair<std::string, bool>> flags;
  std::vector<double> preimage;
};

bool is_solver_failure(const Error& e) {
  return e.kind() == ErrorKind::Infeasible || e.kind() == ErrorKind::NumericalFailure;
}

template <class Fn>
Outcome guarded(Fn&& fn) {
  try {
    Outcome out = fn();
    out.ok = true;
    return out;
  } catch (const Error& e) {
    if (!is_solver_failure(e)) throw;
    Outcome out;
    out.error = e.what();
    return out;
  }
}

std::vector<Outcome> run_trials(const std::vector<TrialKey>& keys, std::size_t threads,
                                const std::function<Outcome(const TrialKey&)>& trial) {
  std::vector<Outcome> outcomes(keys.size());
  parallel_for(keys.size(), threads, [&](std::size_t i) {
    outcomes[i] = guarded([&] { return trial(keys[i]); });
  });
  return outcomes;
}

void record_failures(ReportColumn& column, const std::vector<Outcome>& outcomes) {
  column.trials = outcomes.size();
  std::set<std::string> seen;
  for (const auto& o : outcomes) {
    if (o.ok) {
      ++column.completed;
      continue;
    }
    ++column.failures;
    if (column.failure_messages.size() < kMaxFailureMessages && seen.insert(o.error).second) {
      column.failure_messages.push_back(o.error);
    }
  }
}

ReportColumn aggregate(std::string label, const std::vector<TrialKey>& keys,
                       const std::vector<Outcome>& outcomes,
                       const std::map<std::string, Baseline>& baselines) {
  ReportColumn column;
  column.label = std::move(label);
  record_failures(column, outcomes);

  std::map<std::string, std::vector<double>> samples;
  std::map<std::string, std::vector<double>> flags;
  std::map<std::size_t, std::vector<double>> per_user_score;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const auto& o = outcomes[i];
    if (!o.ok) continue;
    for (const auto& [name, v] : o.samples) {
      samples[name].push_back(v);
      if (name == "score") per_user_score[keys[i].user].push_back(v);
    }
    for (const auto& [name, f] : o.flags) flags[name].push_back(f ? 1.0 : 0.0);
  }
  for (const auto& [name, values] : samples) column.stats[name] = ScoreStats::of(values);
  if (!per_user_score.empty()) {
    std::vector<double> user_means;
    for (const auto& [user, values] : per_user_score) {
      user_means.push_back(ScoreStats::of(values).avg);
    }
    column.stats["score_per_user"] = ScoreStats::of(user_means);
  }
  for (const auto& [name, values] : flags) {
    const double rate = ScoreStats::of(values).avg;
    column.rates[name] = rate;
    if (auto it = baselines.find(name); it != baselines.end()) {
      column.advantage[name] = rate - it->second.fmr;
    }
  }
  return column;
}

Baseline make_baseline(const Corpus& corpus, const PairMetric& metric, double tau,
                       const std::string& metric_name) {
  const auto dists = score_distributions(corpus, metric);
  const auto direction = direction_of(metric.kind);
  const auto rates = rates_at_threshold(dists, tau, direction);
  const auto e = eer(dists, direction);
  Baseline b;
  b.metric = metric_name;
  b.tau = tau;
  b.direction = direction == ScoreDirection::AcceptBelow ? "accept_below" : "accept_above";
  b.fmr = rates.fmr;
  b.fnmr = rates.fnmr;
  b.eer = e.eer;
  b.tau_star = e.tau_star;
  b.genuine = ScoreStats::of(dists.genuine);
  b.impostor = ScoreStats::of(dists.impostor);
  return b;
}

class Runner {
 public:
  Runner(const ExperimentConfig& config, const Corpus& corpus)
      : cfg_(config), corpus_(corpus) {
    cfg_.validate();
    corpus_.validate();
    require(cfg_.params.n == corpus_.n, ErrorKind::DimensionError,
            "scheme n differs from the corpus feature length");
    user_count_ = cfg_.max_users == 0 ? corpus_.users.size()
                                      : std::min(cfg_.max_users, corpus_.users.size());
    require(user_count_ >= 1, ErrorKind::InsufficientData, "corpus has no users");
  }

  ExperimentReport run() {
    ExperimentReport report;
    report.experiment = to_string(cfg_.kind);
    report.config = to_json(cfg_);
    report.config["derived_seeds"] = {
        {"baseline", baseline_seed()},
        {"holdout", derive_seed(cfg_.seed, Stream::Holdout)},
        {"link_pairs", derive_seed(cfg_.seed, Stream::Pairs, kLinkPairsStream)},
        {"enrollment", "derive_seed(seed, 2, user, enrollment + 1000 * trial)"},
        {"link_enrollment", "derive_seed(seed, 6, user, sample)"},
    };
    report.config["users_evaluated"] = user_count_;

    switch (cfg_.kind) {
      case ExperimentKind::GrpAuth:
      case ExperimentKind::UrpAuth:
        auth(report);
        break;
      case ExperimentKind::GrpAuthMultiLeak:
      case ExperimentKind::GrpLongLived:
      case ExperimentKind::UrpLongLived:
        long_lived(report);
        break;
      case ExperimentKind::GrpReversibility:
        reversibility(report);
        break;
      case ExperimentKind::Link:
        link(report);
        break;
    }
    return report;
  }

 private:
  std::uint64_t baseline_seed() const { return derive_seed(cfg_.seed, Stream::Baseline); }

  std::uint64_t enrollment_seed(std::size_t user, std::size_t e, std::size_t trial) const {
    return derive_seed(cfg_.seed, Stream::Enrollment, user, e + kTrialStride * trial);
  }

  const FeatureVector& sample(std::size_t user, std::size_t e) const {
    return corpus_.users[user].samples[e - 1];
  }

  std::vector<TrialKey> keys(const std::vector<std::size_t>& users) const {
    std::vector<TrialKey> out;
    for (auto u : users) {
      for (std::size_t t = 0; t < cfg_.trials_per_user; ++t) out.push_back({u, t});
    }
    return out;
  }

  std::vector<std::size_t> users_with(std::size_t samples) const {
    std::vector<std::size_t> out;
    for (std::size_t u = 0; u < user_count_; ++u) {
      if (corpus_.users[u].samples.size() < samples) {
        fail(ErrorKind::InsufficientData,
             "user " + corpus_.users[u].user_id + " has fewer than " +
                 std::to_string(samples) + " samples");
      }
      out.push_back(u);
    }
    return out;
  }

  Scheme scheme() const {
    if (cfg_.kind == ExperimentKind::Link) return cfg_.link_scheme;
    return is_urp(cfg_.kind) ? Scheme::Urp : Scheme::Grp;
  }

  double tally(std::size_t rows) const {
    return static_cast<double>(rows + 2 * cfg_.params.n);
  }

  void template_baseline(ExperimentReport& report, const std::string& rate) const {
    const auto metric = PairMetric::template_rate(scheme(), cfg_.params, baseline_seed());
    report.baselines[rate] =
        make_baseline(corpus_, metric, cfg_.params.tau, "template_hamming_rate");
  }

  std::vector<GrpLeak> grp_leaks(std::size_t user, std::size_t n, std::size_t trial) const {
    std::vector<GrpLeak> leaks;
    for (std::size_t e = 1; e <= n; ++e) {
      auto secret = std::make_shared<const GrpSecret>(
          grp_gen_secret(enrollment_seed(user, e, trial), cfg_.params));
      auto tmpl = grp_transform(*secret, sample(user, e));
      leaks.emplace_back(std::move(secret), std::move(tmpl));
    }
    return leaks;
  }

  std::vector<UrpLeak> urp_leaks(std::size_t user, std::size_t n, std::size_t trial) const {
    std::vector<UrpLeak> leaks;
    for (std::size_t e = 1; e <= n; ++e) {
      auto secret = std::make_shared<const UrpSecret>(
          urp_gen_secret(enrollment_seed(user, e, trial), cfg_.params));
      auto tmpl = urp_transform(*secret, sample(user, e));
      leaks.emplace_back(std::move(secret), std::move(tmpl));
    }
    return leaks;
  }

  void auth(ExperimentReport& report) {
    const auto users = users_with(1);
    const auto trial_keys = keys(users);
    const bool urp = scheme() == Scheme::Urp;
    auto outcomes = run_trials(trial_keys, cfg_.threads, [&](const TrialKey& key) {
      Outcome o;
      Template leaked;
      Template presented;
      Preimage pre;
      std::size_t rows = 0;
      if (urp) {
        const auto leaks = urp_leaks(key.user, 1, key.trial);
        const auto system = urp_build_constraints(leaks, cfg_.margin, cfg_.log_bounds,
                                                  cfg_.margin_mode);
        rows = system.rows();
        pre = urp_preimage(system, cfg_.solver);
        leaked = leaks.front().tmpl;
        presented = urp_transform(*leaks.front().secret, pre.values);
      } else {
        const auto leaks = grp_leaks(key.user, 1, key.trial);
        const auto system = grp_build_constraints(leaks, cfg_.margin, cfg_.margin_mode);
        rows = system.rows();
        pre = grp_preimage(system, opt::Objective::none(), cfg_.solver);
        leaked = leaks.front().tmpl;
        presented = grp_transform(*leaks.front().secret, pre.values);
      }
      o.samples.emplace_back("score", comparison_score(presented, leaked));
      o.samples.emplace_back("constraints", tally(rows));
      o.samples.emplace_back("max_violation", pre.provenance.max_violation);
      o.samples.emplace_back("iterations", pre.provenance.iterations);
      o.flags.emplace_back("rate_auth", verify_template(presented, leaked, cfg_.params.tau));
      o.flags.emplace_back("exact_match", presented == leaked);
      return o;
    });
    template_baseline(report, "rate_auth");
    report.columns.push_back(aggregate("N=1", trial_keys, outcomes, report.baselines));
  }

  void long_lived(ExperimentReport& report) {
    const bool urp = scheme() == Scheme::Urp;
    const bool selected = cfg_.kind == ExperimentKind::GrpAuthMultiLeak &&
                          cfg_.strategy == LeakStrategy::SelectedConstraints;
    template_baseline(report, "rate_auth_ll");
    for (const auto n : cfg_.leaks) {
      const auto users = users_with(n + 1);
      const auto trial_keys = keys(users);
      auto outcomes = run_trials(trial_keys, cfg_.threads, [&](const TrialKey& key) {
        Outcome o;
        const auto fresh_seed = enrollment_seed(key.user, n + 1, key.trial);
        const auto& fresh_sample = sample(key.user, n + 1);
        LongLivedScore result;
        Preimage pre;
        std::size_t rows = 0;
        if (urp) {
          const auto leaks = urp_leaks(key.user, n, key.trial);
          const auto system = urp_build_constraints(leaks, cfg_.margin, cfg_.log_bounds,
                                                    cfg_.margin_mode);
          rows = system.rows();
          pre = urp_preimage(system, cfg_.solver);
          const auto secret = urp_gen_secret(fresh_seed, cfg_.params);
          result = urp_long_lived(pre, secret, urp_transform(secret, fresh_sample),
                                  cfg_.params.tau);
        } else {
          const auto leaks = grp_leaks(key.user, n, key.trial);
          if (selected) {
            auto refined = grp_sc_refine(leaks, cfg_.margin, cfg_.margin_mode, cfg_.solver);
            rows = refined.row_counts.back();
            pre = std::move(refined.preimage);
          } else {
            const auto system = grp_build_constraints(leaks, cfg_.margin, cfg_.margin_mode);
            rows = system.rows();
            pre = grp_preimage(system, opt::Objective::none(), cfg_.solver);
          }
          const auto secret = grp_gen_secret(fresh_seed, cfg_.params);
          result = grp_long_lived(pre, secret, grp_transform(secret, fresh_sample),
                                  cfg_.params.tau);
        }
        o.samples.emplace_back("score", result.score);
        o.samples.emplace_back("constraints", tally(rows));
        o.samples.emplace_back("max_violation", pre.provenance.max_violation);
        o.flags.emplace_back("rate_auth_ll", result.accepted);
        return o;
      });
      report.columns.push_back(
          aggregate("N=" + std::to_string(n), trial_keys, outcomes, report.baselines));
    }
  }

  static std::string tau_label(const std::string& prefix, double tau) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s@%g", prefix.c_str(), tau);
    return buf;
  }

  void reversibility(ExperimentReport& report) {
    for (double t : cfg_.taus_euc) {
      report.baselines[tau_label("rate_rev_euc", t)] =
          make_baseline(corpus_, PairMetric::euclidean(), t, "euclidean");
    }
    report.baselines[tau_label("rate_rev_sim", cfg_.tau_sim)] =
        make_baseline(corpus_, PairMetric::similarity(), cfg_.tau_sim, "similarity");

    const auto mean = corpus_mean(corpus_);
    const double range_count =
        component_range_count(kFeatureRange.first, kFeatureRange.second, 1e-4);

    // Held-out user and sample for case 3.
    Rng holdout_rng(derive_seed(cfg_.seed, Stream::Holdout));
    const auto held_user = static_cast<std::size_t>(holdout_rng.below(user_count_));
    const auto held_sample = static_cast<std::size_t>(
        holdout_rng.below(corpus_.users[held_user].samples.size()));
    report.config["holdout"] = {{"user", corpus_.users[held_user].user_id},
                                {"sample", corpus_.users[held_user].sample_ids[held_sample]}};

    for (const auto objective_case : cfg_.cases) {
      for (const auto n : cfg_.leaks) {
        auto users = users_with(n);
        if (objective_case == ObjectiveCase::HeldOut) {
          users.erase(std::remove(users.begin(), users.end(), held_user), users.end());
          require(!users.empty(), ErrorKind::InsufficientData,
                  "held-out objective needs at least two users");
        }
        opt::Objective objective;
        switch (objective_case) {
          case ObjectiveCase::None:
            break;
          case ObjectiveCase::MinNorm:
            objective = opt::Objective::min_squared_norm();
            break;
          case ObjectiveCase::CorpusMean:
            objective = opt::Objective::min_squared_distance_to(
                Eigen::Map<const opt::Vector>(mean.data(), static_cast<Eigen::Index>(mean.size())));
            break;
          case ObjectiveCase::HeldOut: {
            const auto v = sample(held_user, held_sample + 1).values();
            objective = opt::Objective::min_squared_distance_to(
                Eigen::Map<const opt::Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
            break;
          }
        }

        const auto trial_keys = keys(users);
        auto outcomes = run_trials(trial_keys, cfg_.threads, [&](const TrialKey& key) {
          Outcome o;
          const auto leaks = grp_leaks(key.user, n, key.trial);
          const auto system = grp_build_constraints(leaks, cfg_.margin, cfg_.margin_mode);
          const auto pre = grp_preimage(system, objective, cfg_.solver);
          const auto& x = sample(key.user, 1);
          const double distance = euclidean_distance(pre.values, x);
          const double similarity = similarity_score(pre.values, x);
          o.samples.emplace_back("distance_euc", distance);
          o.samples.emplace_back("similarity", similarity);
          o.samples.emplace_back(
              "sign_accuracy",
              static_cast<double>(beta_sign_agreement(pre.values, x)) /
                  static_cast<double>(x.size()));
          o.samples.emplace_back("max_violation", pre.provenance.max_violation);
          for (double t : cfg_.taus_euc) {
            o.flags.emplace_back(tau_label("rate_rev_euc", t), distance <= t);
          }
          o.flags.emplace_back(tau_label("rate_rev_sim", cfg_.tau_sim), similarity >= cfg_.tau_sim);
          return o;
        });
        auto column = aggregate(
            "case=" + std::to_string(static_cast<int>(objective_case)) + " N=" + std::to_string(n),
            trial_keys, outcomes, report.baselines);
        if (auto it = column.stats.find("sign_accuracy");
            it != column.stats.end() && it->second.avg > 0.0) {
          column.values["search_bits"] =
              sign_guess_bits(range_count, cfg_.params.n, it->second.avg);
          column.values["search_bits_baseline"] =
              sign_guess_baseline_bits(range_count, cfg_.params.n);
        }
        report.columns.push_back(std::move(column));
      }
    }
  }

  void link(ExperimentReport& report) {
    const bool urp = cfg_.link_scheme == Scheme::Urp;
    const auto mean = corpus_mean(corpus_);
    opt::Objective objective;
    if (cfg_.cases.front() == ObjectiveCase::MinNorm) {
      objective = opt::Objective::min_squared_norm();
    } else if (cfg_.cases.front() == ObjectiveCase::CorpusMean) {
      objective = opt::Objective::min_squared_distance_to(
          Eigen::Map<const opt::Vector>(mean.data(), static_cast<Eigen::Index>(mean.size())));
    }

    // One preimage per sample, each from its own enrollment.
    std::vector<TrialKey> trial_keys;
    for (std::size_t u = 0; u < user_count_; ++u) {
      for (std::size_t s = 0; s < corpus_.users[u].samples.size(); ++s) {
        trial_keys.push_back({u, s});
      }
    }
    auto outcomes = run_trials(trial_keys, cfg_.threads, [&](const TrialKey& key) {
      const auto seed = derive_seed(cfg_.seed, Stream::Link, key.user, key.trial);
      const auto& x = corpus_.users[key.user].samples[key.trial];
      Outcome o;
      Preimage pre;
      if (urp) {
        auto secret = std::make_shared<const UrpSecret>(urp_gen_secret(seed, cfg_.params));
        auto tmpl = urp_transform(*secret, x);
        const UrpLeak leak(std::move(secret), std::move(tmpl));
        pre = urp_preimage(urp_build_constraints(std::span(&leak, 1), cfg_.margin,
                                                 cfg_.log_bounds, cfg_.margin_mode),
                           cfg_.solver);
      } else {
        auto secret = std::make_shared<const GrpSecret>(grp_gen_secret(seed, cfg_.params));
        auto tmpl = grp_transform(*secret, x);
        const GrpLeak leak(std::move(secret), std::move(tmpl));
        pre = grp_preimage(
            grp_build_constraints(std::span(&leak, 1), cfg_.margin, cfg_.margin_mode),
            objective, cfg_.solver);
      }
      o.samples.emplace_back("max_violation", pre.provenance.max_violation);
      o.preimage = std::move(pre.values);
      return o;
    });

    // Corpus of preimages; origin[u][s] points back at the feature sample.
    Corpus preimages;
    preimages.n = corpus_.n;
    std::vector<std::vector<const FeatureVector*>> origin;
    for (std::size_t i = 0; i < trial_keys.size(); ++i) {
      if (!outcomes[i].ok) continue;
      const auto& key = trial_keys[i];
      const auto& user = corpus_.users[key.user];
      if (preimages.users.empty() || preimages.users.back().user_id != user.user_id) {
        preimages.users.push_back({user.user_id, {}, {}});
        origin.emplace_back();
      }
      preimages.users.back().sample_ids.push_back(user.sample_ids[key.trial]);
      preimages.users.back().samples.emplace_back(outcomes[i].preimage);
      origin.back().push_back(&user.samples[key.trial]);
    }

    auto column = aggregate("t_link=" + tau_label("", cfg_.link_metric.threshold).substr(1),
                            trial_keys, outcomes, report.baselines);
    Rng rng(derive_seed(cfg_.seed, Stream::Pairs, kLinkPairsStream));
    std::size_t c1 = 0;
    std::size_t c2 = 0;
    std::vector<double> genuine_stat;
    std::vector<double> impostor_stat;
    std::vector<double> genuine_raw;
    std::vector<double> impostor_raw;
    const auto& metric = cfg_.link_metric;
    auto pre_of = [&](const SampleRef& r) {
      return preimages.users[r.user].samples[r.sample].values();
    };
    auto raw_of = [&](const SampleRef& r) { return origin[r.user][r.sample]->values(); };
    for (std::size_t i = 0; i < cfg_.link_trials; ++i) {
      const auto [g1, g2] = draw_genuine_pair(preimages, rng);
      const double sg = link_statistic(pre_of(g1), pre_of(g2), metric);
      genuine_stat.push_back(sg);
      genuine_raw.push_back(link_statistic(raw_of(g1), raw_of(g2), metric));
      c1 += sg >= metric.threshold;
      const auto [i1, i2] = draw_impostor_pair(preimages, rng);
      const double si = link_statistic(pre_of(i1), pre_of(i2), metric);
      impostor_stat.push_back(si);
      impostor_raw.push_back(link_statistic(raw_of(i1), raw_of(i2), metric));
      c2 += si < metric.threshold;
    }
    const double trials = static_cast<double>(cfg_.link_trials);
    column.rates["c1"] = static_cast<double>(c1) / trials;
    column.rates["c2"] = static_cast<double>(c2) / trials;
    column.rates["rate_link"] = (column.rates["c1"] + column.rates["c2"]) / 2.0;
    column.advantage["rate_link"] = column.rates["rate_link"] - 0.5;
    column.stats["statistic_genuine"] = ScoreStats::of(genuine_stat);
    column.stats["statistic_impostor"] = ScoreStats::of(impostor_stat);
    column.values["link_trials"] = trials;

    Baseline guess;
    guess.metric = metric.kind == LinkMetric::Kind::Beta ? "beta_on_features" : "pearson_on_features";
    guess.tau = metric.threshold;
    guess.direction = "accept_above";
    guess.fmr = 0.5;
    guess.fnmr = 0.5;
    guess.eer = 0.5;
    guess.tau_star = metric.threshold;
    guess.genuine = ScoreStats::of(genuine_raw);
    guess.impostor = ScoreStats::of(impostor_raw);
    report.baselines["rate_link"] = guess;
    report.columns.push_back(std::move(column));
  }

  ExperimentConfig cfg_;
  const Corpus& corpus_;
  std::size_t user_count_ = 0;
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config, const Corpus& corpus) {
  return Runner(config, corpus).run();
}

}  // namespace iomlab
