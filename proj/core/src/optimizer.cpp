#include "iomlab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include <Eigen/Cholesky>

#include "iomlab/error.hpp"

namespace iomlab::opt {

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

void ConstraintSystem::validate() const {
  require(b.size() == a.rows(), ErrorKind::InvalidInput,
          "constraint system: b length differs from row count");
  require(lower.size() == a.cols() && upper.size() == a.cols(),
          ErrorKind::InvalidInput,
          "constraint system: bound length differs from column count");
  require(a.cols() > 0, ErrorKind::InvalidInput,
          "constraint system: no variables");
  require(a.allFinite() && b.allFinite() && lower.allFinite() &&
              upper.allFinite(),
          ErrorKind::InvalidInput, "constraint system: non-finite entry");
  require((lower.array() <= upper.array()).all(), ErrorKind::InvalidInput,
          "constraint system: lower bound exceeds upper bound");
}

ConstraintSystem ConstraintSystem::box(Vector lower, Vector upper) {
  ConstraintSystem system;
  system.a.resize(0, lower.size());
  system.b.resize(0);
  system.lower = std::move(lower);
  system.upper = std::move(upper);
  return system;
}

SolverSettings SolverSettings::from_env() {
  SolverSettings settings;
  if (const char* v = std::getenv("IOMLAB_FEAS_TOL")) settings.feas_tol = std::strtod(v, nullptr);
  if (const char* v = std::getenv("IOMLAB_OPT_TOL")) settings.opt_tol = std::strtod(v, nullptr);
  if (const char* v = std::getenv("IOMLAB_MAX_ITER")) settings.max_iterations = std::atoi(v);
  return settings;
}

double max_violation(const ConstraintSystem& system, const Vector& y) {
  double worst = 0.0;
  const auto d = system.a.cols();
  for (Eigen::Index i = 0; i < system.a.rows(); ++i) {
    double lhs = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) lhs += system.a(i, j) * y[j];
    worst = std::max(worst, lhs - system.b[i]);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    worst = std::max(worst, system.lower[j] - y[j]);
    worst = std::max(worst, y[j] - system.upper[j]);
  }
  return worst;
}

namespace {

using ColMatrix = Eigen::MatrixXd;

constexpr Eigen::Index kChunkRows = 1024;
constexpr double kStepFraction = 0.99;

// Rows of `a` are used through a diagonal scaling: row i of the working
// matrix is scale[i] * a.row(i), so the engine never copies `a`.
struct Problem {
  const Matrix* a = nullptr;
  Vector scale;  // per-row factor
  Vector b;      // scaled right-hand side
  Vector lower;
  Vector upper;
  double hessian = 0.0;  // objective Hessian is hessian * I
  Vector target;         // quadratic centre when hessian > 0
  Vector linear;         // linear objective term

  Eigen::Index rows() const { return a->rows(); }
  Eigen::Index cols() const { return a->cols(); }

  Vector apply(const Vector& y) const { return scale.cwiseProduct(*a * y); }
  Vector apply_transpose(const Vector& v) const {
    return a->transpose() * scale.cwiseProduct(v);
  }
};

struct Iterate {
  Vector y;
  Vector s, z;    // rows
  Vector su, zu;  // upper box
  Vector sl, zl;  // lower box
};

struct Direction {
  Vector dy, ds, dz, dsu, dzu, dsl, dzl;
};

struct Residuals {
  Vector rp, rpu, rpl, rd;
};

struct IpmOutcome {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector y;
  int iterations = 0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double distance_bound = 0.0;  // QP only: bound on ||y - y*||
  std::string message;
};

// H = hessian*I + A_s' diag(w) A_s + diag(box), lower triangle only.
void form_normal_matrix(const Problem& p, const Vector& weights,
                        const Vector& box_diag, ColMatrix& h) {
  const auto d = p.cols();
  h.setZero(d, d);
  Matrix chunk;
  for (Eigen::Index start = 0; start < p.rows(); start += kChunkRows) {
    const auto len = std::min(kChunkRows, p.rows() - start);
    const Vector root = (weights.segment(start, len).array() *
                         p.scale.segment(start, len).array().square())
                            .sqrt()
                            .matrix();
    chunk.noalias() = root.asDiagonal() * p.a->middleRows(start, len);
    h.selfadjointView<Eigen::Lower>().rankUpdate(chunk.transpose());
  }
  h.diagonal() += box_diag;
  if (p.hessian > 0.0) h.diagonal().array() += p.hessian;
}

double max_step(const Vector& v, const Vector& dv) {
  double alpha = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

// For min h/2 ||y - t||^2 over a convex set, a primal feasible iterate with
// dual residual rd and complementarity gap c satisfies
//   h ||y - y*||^2 <= ||rd|| ||y - y*|| + c,
// so ||y - y*|| is at most the positive root of that quadratic.
double distance_bound(double h, double dual, double comp) {
  return (dual + std::sqrt(dual * dual + 4.0 * h * std::max(comp, 0.0))) / (2.0 * h);
}

// Row-slack based infeasibility certificate: if for some z >= 0
//   b'z - min_{lower <= y <= upper} (A_s' z)'y < 0
// then every box point violates some row. Returns that quantity / ||z||_1.
double certificate_value(const Problem& p, const Vector& z, const Vector& g) {
  const double norm = z.lpNorm<1>();
  if (!(norm > 0.0)) return 0.0;
  double value = p.b.dot(z);
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    value -= std::min(g[j] * p.lower[j], g[j] * p.upper[j]);
  }
  return value / norm;
}

class NormalSolver {
 public:
  // weights and box_diag define the exact operator used for refinement.
  bool factor(const Problem& p, ColMatrix& h, Vector weights, Vector box_diag) {
    problem_ = &p;
    weights_ = std::move(weights);
    box_diag_ = std::move(box_diag);
    const double base = std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    llt_.compute(h);
    double shift = 1e-14 * base;
    while (llt_.info() != Eigen::Success && shift < 1e-4 * base) {
      h.diagonal().array() += shift;
      llt_.compute(h);
      shift *= 100.0;
    }
    return llt_.info() == Eigen::Success;
  }

  // Two steps of iterative refinement against the unshifted operator.
  Vector solve(const Vector& rhs) const {
    Vector x = llt_.solve(rhs);
    for (int step = 0; step < kRefineSteps; ++step) {
      const Vector residual = rhs - apply(x);
      x += llt_.solve(residual);
    }
    return x;
  }

 private:
  static constexpr int kRefineSteps = 2;

  Vector apply(const Vector& v) const {
    const Problem& p = *problem_;
    Vector out = p.apply_transpose(weights_.cwiseProduct(p.apply(v)));
    out += box_diag_.cwiseProduct(v);
    if (p.hessian > 0.0) out += p.hessian * v;
    return out;
  }

  Eigen::LLT<ColMatrix, Eigen::Lower> llt_;
  const Problem* problem_ = nullptr;
  Vector weights_;
  Vector box_diag_;
};

Direction compute_direction(const Problem& p, const Iterate& it,
                            const Residuals& r, const NormalSolver& normal,
                            const Vector& rc, const Vector& rcu,
                            const Vector& rcl) {
  // Eliminates ds, dz and the box pairs; see the Newton system in the header
  // comment of run_ipm.
  const Vector row_term = ((-rc.array() + it.z.array() * r.rp.array()) / it.s.array()).matrix();
  const Vector up_term = ((-rcu.array() + it.zu.array() * r.rpu.array()) / it.su.array()).matrix();
  const Vector lo_term = ((-rcl.array() + it.zl.array() * r.rpl.array()) / it.sl.array()).matrix();
  const Vector rhs = -r.rd - p.apply_transpose(row_term) - up_term + lo_term;

  Direction dir;
  dir.dy = normal.solve(rhs);
  dir.ds = -r.rp - p.apply(dir.dy);
  dir.dz = ((-rc.array() - it.z.array() * dir.ds.array()) / it.s.array()).matrix();
  dir.dsu = -r.rpu - dir.dy;
  dir.dzu = ((-rcu.array() - it.zu.array() * dir.dsu.array()) / it.su.array()).matrix();
  dir.dsl = -r.rpl + dir.dy;
  dir.dzl = ((-rcl.array() - it.zl.array() * dir.dsl.array()) / it.sl.array()).matrix();
  return dir;
}

// Newton system for  min 1/2 h||y - t||^2 + c'y  s.t.  A_s y + s = b,
// y + su = u, -y + sl = -l, with s, su, sl, z, zu, zl >= 0:
//   h dy + A_s' dz + dzu - dzl = -rd
//   A_s dy + ds = -rp,  dy + dsu = -rpu,  -dy + dsl = -rpl
//   Z ds + S dz = -rc  (and the box analogues)
IpmOutcome run_ipm(const Problem& p, const SolverSettings& settings,
                   double gap_tol, bool check_certificate) {
  const auto r = p.rows();
  const auto d = p.cols();
  const double pairs = static_cast<double>(r + 2 * d);
  const bool quadratic = p.hessian > 0.0;

  double objective_scale = 1.0;
  if (p.linear.size() > 0) objective_scale = std::max(objective_scale, p.linear.cwiseAbs().maxCoeff());
  if (quadratic && p.target.size() > 0) {
    objective_scale = std::max(objective_scale, p.hessian * p.target.cwiseAbs().maxCoeff());
  }
  const double dual_tol = 0.1 * settings.opt_tol * objective_scale;
  const double primal_tol = 0.1 * settings.feas_tol;

  Iterate it;
  const Vector width = p.upper - p.lower;
  it.y = 0.5 * (p.lower + p.upper);
  const double floor_box = 1e-3;
  it.su = (p.upper - it.y).cwiseMax(floor_box);
  it.sl = (it.y - p.lower).cwiseMax(floor_box);
  it.s = (p.b - p.apply(it.y)).cwiseMax(1.0);
  it.z = Vector::Ones(r);
  it.zu = Vector::Ones(d);
  it.zl = Vector::Ones(d);

  IpmOutcome out;
  NormalSolver normal;
  ColMatrix h;
  Residuals res;
  int stalled = 0;

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    out.iterations = iter;
    const Vector g = p.apply_transpose(it.z);
    res.rp = p.apply(it.y) + it.s - p.b;
    res.rpu = it.y + it.su - p.upper;
    res.rpl = -it.y + it.sl + p.lower;
    res.rd = g + it.zu - it.zl;
    if (p.linear.size() > 0) res.rd += p.linear;
    if (quadratic) res.rd += p.hessian * (it.y - p.target);

    const double comp = it.s.dot(it.z) + it.su.dot(it.zu) + it.sl.dot(it.zl);
    const double mu = comp / pairs;
    double primal = 0.0;
    for (Eigen::Index i = 0; i < r; ++i) primal = std::max(primal, std::abs(res.rp[i]) / p.scale[i]);
    if (d > 0) primal = std::max({primal, res.rpu.cwiseAbs().maxCoeff(), res.rpl.cwiseAbs().maxCoeff()});
    const double dual = res.rd.norm();
    out.primal = primal;
    out.dual = dual;
    out.complementarity = comp;

    if (!std::isfinite(primal) || !std::isfinite(dual) || !std::isfinite(comp)) {
      out.message = "non-finite iterate";
      return out;
    }
    bool converged = primal <= primal_tol && dual <= dual_tol && comp <= gap_tol;
    if (quadratic) {
      out.distance_bound = distance_bound(p.hessian, dual, comp);
      converged = primal <= primal_tol && out.distance_bound <= settings.opt_tol;
    }
    if (converged) {
      out.status = SolveStatus::Optimal;
      out.y = it.y;
      return out;
    }
    if (check_certificate && r > 0 &&
        certificate_value(p, it.z, g) < -settings.feas_tol) {
      out.status = SolveStatus::Infeasible;
      out.message = "infeasibility certificate from row multipliers";
      return out;
    }
    if (iter == settings.max_iterations) break;

    const Vector weights = (it.z.array() / it.s.array()).matrix();
    const Vector box_diag = (it.zu.array() / it.su.array() + it.zl.array() / it.sl.array()).matrix();
    form_normal_matrix(p, weights, box_diag, h);
    if (!normal.factor(p, h, weights, box_diag)) {
      out.message = "normal matrix factorization failed";
      return out;
    }

    // Predictor.
    Vector rc = it.s.cwiseProduct(it.z);
    Vector rcu = it.su.cwiseProduct(it.zu);
    Vector rcl = it.sl.cwiseProduct(it.zl);
    const Direction aff = compute_direction(p, it, res, normal, rc, rcu, rcl);
    double ap = std::min({max_step(it.s, aff.ds), max_step(it.su, aff.dsu), max_step(it.sl, aff.dsl)});
    double ad = std::min({max_step(it.z, aff.dz), max_step(it.zu, aff.dzu), max_step(it.zl, aff.dzl)});
    if (quadratic) ap = ad = std::min(ap, ad);
    const double mu_aff =
        ((it.s + ap * aff.ds).dot(it.z + ad * aff.dz) +
         (it.su + ap * aff.dsu).dot(it.zu + ad * aff.dzu) +
         (it.sl + ap * aff.dsl).dot(it.zl + ad * aff.dzl)) /
        pairs;
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);

    // Corrector.
    rc.array() += aff.ds.array() * aff.dz.array() - sigma * mu;
    rcu.array() += aff.dsu.array() * aff.dzu.array() - sigma * mu;
    rcl.array() += aff.dsl.array() * aff.dzl.array() - sigma * mu;
    const Direction dir = compute_direction(p, it, res, normal, rc, rcu, rcl);
    ap = kStepFraction * std::min({max_step(it.s, dir.ds), max_step(it.su, dir.dsu), max_step(it.sl, dir.dsl)});
    ad = kStepFraction * std::min({max_step(it.z, dir.dz), max_step(it.zu, dir.dzu), max_step(it.zl, dir.dzl)});
    ap = std::min(ap, 1.0);
    ad = std::min(ad, 1.0);
    if (quadratic) ap = ad = std::min(ap, ad);

    it.y += ap * dir.dy;
    it.s += ap * dir.ds;
    it.su += ap * dir.dsu;
    it.sl += ap * dir.dsl;
    it.z += ad * dir.dz;
    it.zu += ad * dir.dzu;
    it.zl += ad * dir.dzl;

    stalled = (ap < 1e-10 && ad < 1e-10) ? stalled + 1 : 0;
    if (stalled >= 3) {
      out.message = "step length collapsed";
      break;
    }
  }

  // Accept a stalled iterate only if it is primal feasible and close to
  // optimal; the caller still re-checks feasibility independently.
  const bool acceptable =
      quadratic ? out.primal <= primal_tol && out.distance_bound <= settings.opt_tol
                : out.primal <= primal_tol && out.dual <= 10.0 * dual_tol &&
                      out.complementarity <= std::max(gap_tol, 1e-3 * settings.opt_tol);
  if (acceptable) {
    out.status = SolveStatus::Optimal;
    out.y = it.y;
    out.message = "accepted at stall: tolerances met to working precision";
    return out;
  }
  if (out.message.empty()) out.message = "iteration limit reached";
  out.y = it.y;
  return out;
}

Vector row_norms(const Matrix& a) {
  Vector norms(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) norms[i] = a.row(i).norm();
  return norms;
}

// min t  s.t.  A_s y - t <= b_s,  box on y,  t in [t_lo, t_hi]. Always
// strictly feasible; t* > 0 certifies infeasibility of the original rows.
IpmOutcome phase_one(const Problem& p, const SolverSettings& settings,
                     Vector& point, double& value) {
  const auto r = p.rows();
  const auto d = p.cols();
  Matrix augmented(r, d + 1);
  augmented.leftCols(d) = p.scale.asDiagonal() * (*p.a);
  augmented.col(d).setConstant(-1.0);

  const Vector mid = 0.5 * (p.lower + p.upper);
  const double start_violation = r > 0 ? (p.apply(mid) - p.b).maxCoeff() : 0.0;
  const double reach = p.lower.cwiseAbs().cwiseMax(p.upper.cwiseAbs()).sum();

  Problem aux;
  aux.a = &augmented;
  aux.scale = Vector::Ones(r);
  aux.b = p.b;
  aux.lower.resize(d + 1);
  aux.upper.resize(d + 1);
  aux.lower << p.lower, -(reach + (r > 0 ? p.b.cwiseAbs().maxCoeff() : 0.0) + 1.0);
  aux.upper << p.upper, std::max(0.0, start_violation) + 1.0;
  aux.linear = Vector::Zero(d + 1);
  aux.linear[d] = 1.0;

  IpmOutcome outcome = run_ipm(aux, settings, settings.feas_tol * 1e-2, false);
  if (outcome.status == SolveStatus::Optimal) {
    point = outcome.y.head(d);
    value = outcome.y[d];
  }
  return outcome;
}

}  // namespace

SolveResult InteriorPointEngine::solve(const ConstraintSystem& system,
                                       const Objective& objective,
                                       const SolverSettings& settings) const {
  system.validate();
  const auto d = system.a.cols();
  if (objective.kind == Objective::Kind::MinSquaredDistanceTo) {
    require(objective.target.size() == d, ErrorKind::InvalidInput,
            "objective target length differs from column count");
  }

  SolveResult result;
  const Vector norms = row_norms(system.a);

  // Zero rows are either vacuous (b >= 0) or certify infeasibility (b < 0).
  std::vector<Eigen::Index> kept;
  kept.reserve(static_cast<std::size_t>(system.a.rows()));
  for (Eigen::Index i = 0; i < system.a.rows(); ++i) {
    if (norms[i] > 0.0) {
      kept.push_back(i);
    } else if (system.b[i] < -settings.feas_tol) {
      result.status = SolveStatus::Infeasible;
      result.diagnostics.message = "zero row with negative right-hand side";
      return result;
    }
  }
  Matrix compact;
  const Matrix* rows = &system.a;
  Vector b = system.b;
  Vector kept_norms = norms;
  if (kept.size() != static_cast<std::size_t>(system.a.rows())) {
    const auto count = static_cast<Eigen::Index>(kept.size());
    compact.resize(count, d);
    b.resize(count);
    kept_norms.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
      compact.row(i) = system.a.row(kept[static_cast<std::size_t>(i)]);
      b[i] = system.b[kept[static_cast<std::size_t>(i)]];
      kept_norms[i] = norms[kept[static_cast<std::size_t>(i)]];
    }
    rows = &compact;
  }

  Problem problem;
  problem.a = rows;
  problem.scale = kept_norms.cwiseInverse();
  problem.b = b.cwiseProduct(problem.scale);
  problem.lower = system.lower;
  problem.upper = system.upper;
  const auto pairs = static_cast<double>(rows->rows() + 2 * d);
  // Feasibility runs stop at average complementarity <= opt_tol; quadratic
  // runs stop on distance_bound instead.
  const double gap_tol = settings.opt_tol * pairs;
  if (objective.kind != Objective::Kind::None) {
    problem.hessian = 1.0;
    problem.target = objective.kind == Objective::Kind::MinSquaredDistanceTo
                         ? objective.target
                         : Vector::Zero(d);
  }

  IpmOutcome outcome = run_ipm(problem, settings, gap_tol, true);
  result.diagnostics.iterations = outcome.iterations;
  result.diagnostics.primal_residual = outcome.primal;
  result.diagnostics.dual_residual = outcome.dual;
  result.diagnostics.complementarity = outcome.complementarity;
  result.diagnostics.message = outcome.message;

  if (outcome.status == SolveStatus::NumericalFailure && rows->rows() > 0) {
    Vector point;
    double value = 0.0;
    const IpmOutcome first = phase_one(problem, settings, point, value);
    result.diagnostics.phase_one_used = true;
    result.diagnostics.phase_one_value = value;
    if (first.status == SolveStatus::Optimal) {
      if (value > settings.feas_tol) {
        outcome.status = SolveStatus::Infeasible;
        outcome.message = "phase one optimum is positive";
      } else if (objective.kind == Objective::Kind::None) {
        outcome.status = SolveStatus::Optimal;
        outcome.y = point;
        outcome.message = "feasible point from phase one";
      }
    }
    result.diagnostics.message = outcome.message;
  }

  result.status = outcome.status;
  if (outcome.status != SolveStatus::Optimal) return result;

  result.y = outcome.y.cwiseMax(system.lower).cwiseMin(system.upper);
  result.diagnostics.max_violation = max_violation(system, result.y);
  if (!(result.diagnostics.max_violation <= settings.feas_tol)) {
    result.status = SolveStatus::NumericalFailure;
    result.diagnostics.message = "returned point fails the residual re-check";
  }
  return result;
}

const SolverEngine& default_engine() {
  static const InteriorPointEngine engine;
  return engine;
}

SolveResult solve(const ConstraintSystem& system, const Objective& objective,
                  const SolverSettings& settings) {
  return default_engine().solve(system, objective, settings);
}

}  // namespace iomlab::opt
