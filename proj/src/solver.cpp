#include "cqrk/solver.hpp"

#include <cmath>
#include <limits>

namespace cqrk {

namespace {

bool all_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

Vector checked_initial(const TimeFn& fn, double t, std::size_t dim, const char* what) {
  if (!fn) throw EvaluationError(std::string("initial function ") + what + " is not set");
  Vector out = fn(t);
  if (out.size() != dim)
    throw EvaluationError(std::string("initial function ") + what + " returned dimension " +
                          std::to_string(out.size()) + ", expected " + std::to_string(dim));
  return out;
}

void add_scaled(Vector& acc, double w, std::span<const double> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * x[i];
}

}  // namespace

void SolverConfig::validate(const DidaeProblem& problem) const {
  if (m < 1) throw std::invalid_argument("SolverConfig: m must be >= 1");
  for (const QuadratureRule* rule : {&alpha_rule, &beta_rule, &gamma_rule}) {
    if (rule->m() != m) throw std::invalid_argument("SolverConfig: rule '" + rule->name() + "' does not have m+1 weights");
    if (std::abs(rule->h() - alpha_rule.h()) > 1e-15 * alpha_rule.h())
      throw std::invalid_argument("SolverConfig: quadrature rules disagree on h");
  }
  if (std::abs(h() * m - problem.tau) > 1e-13 * std::max(1.0, problem.tau))
    throw std::invalid_argument("SolverConfig: m*h does not equal the delay tau");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("SolverConfig: newton_tol must be positive");
  if (newton_max_iter < 1) throw std::invalid_argument("SolverConfig: newton_max_iter must be >= 1");
  if (!(fd_jacobian_step > 0.0)) throw std::invalid_argument("SolverConfig: fd_jacobian_step must be positive");
  if (!(t_end > problem.t0)) throw std::invalid_argument("SolverConfig: t_end must exceed t0");
  if (!(blowup_threshold > 0.0)) throw std::invalid_argument("SolverConfig: blowup_threshold must be positive");
}

SolverConfig make_config(ButcherTableau tableau, int m, double tau, double t_end, const std::string& rule) {
  QuadratureRule r = make_rule(rule, m, tau);
  return SolverConfig{.m = m, .tableau = std::move(tableau), .alpha_rule = r, .beta_rule = r, .gamma_rule = r,
                      .t_end = t_end};
}

std::vector<double> stage_times(long n, double t0, double h, const ButcherTableau& tableau) {
  std::vector<double> out(tableau.stages());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = t0 + static_cast<double>(n) * h + tableau.c()[j] * h;
  return out;
}

// ---------------------------------------------------------------------------
// HistoryBuffer

HistoryBuffer::HistoryBuffer(const DidaeProblem& problem, const InitialData& initial, const ButcherTableau& tableau,
                             int m, double h)
    : m_(m), t0_(problem.t0), h_(h), s_(tableau.stages()), n1_(problem.n1), n2_(problem.n2), c_(tableau.c()) {
  if (m < 1) throw std::invalid_argument("HistoryBuffer: m must be >= 1");
  const std::size_t cap = static_cast<std::size_t>(m) + 1;
  stage_u_.assign(cap, Vector(s_ * n1_));
  stage_v_.assign(cap, Vector(s_ * n2_));
  grid_u_.assign(cap, Vector(n1_));
  grid_v_.assign(cap, Vector(n2_));

  next_stage_ = -m;
  next_grid_ = -m;
  for (long i = -m; i < 0; ++i) {
    StageArrays rec(s_, n1_, n2_);
    for (std::size_t j = 0; j < s_; ++j) {
      const double t = stage_time(i, j);
      const Vector u = checked_initial(initial.psi, t, n1_, "psi");
      const Vector v = checked_initial(initial.phi, t, n2_, "phi");
      std::copy(u.begin(), u.end(), rec.u_at(j).begin());
      std::copy(v.begin(), v.end(), rec.v_at(j).begin());
    }
    push_stage(i, rec);
    const double tg = grid_time(i);
    push_grid(i, checked_initial(initial.psi, tg, n1_, "psi"), checked_initial(initial.phi, tg, n2_, "phi"));
  }
}

std::size_t HistoryBuffer::slot(long i) const {
  const long cap = m_ + 1;
  return static_cast<std::size_t>(((i % cap) + cap) % cap);
}

void HistoryBuffer::check_stage(long i) const {
  if (i >= next_stage_ || i < next_stage_ - (m_ + 1) || i < -m_)
    throw HistoryError("HistoryBuffer: stage record " + std::to_string(i) + " not available (next " +
                       std::to_string(next_stage_) + ")");
}

void HistoryBuffer::check_grid(long i) const {
  if (i >= next_grid_ || i < next_grid_ - (m_ + 1) || i < -m_)
    throw HistoryError("HistoryBuffer: grid record " + std::to_string(i) + " not available (next " +
                       std::to_string(next_grid_) + ")");
}

void HistoryBuffer::push_stage(long n, const StageArrays& stages) {
  if (n != next_stage_) throw HistoryError("HistoryBuffer: stage records must be pushed in order");
  if (stages.u.size() != s_ * n1_ || stages.v.size() != s_ * n2_)
    throw HistoryError("HistoryBuffer: stage record has wrong shape");
  stage_u_[slot(n)] = stages.u;
  stage_v_[slot(n)] = stages.v;
  ++next_stage_;
}

void HistoryBuffer::push_grid(long n, std::span<const double> u, std::span<const double> v) {
  if (n != next_grid_) throw HistoryError("HistoryBuffer: grid records must be pushed in order");
  if (u.size() != n1_ || v.size() != n2_) throw HistoryError("HistoryBuffer: grid record has wrong shape");
  grid_u_[slot(n)].assign(u.begin(), u.end());
  grid_v_[slot(n)].assign(v.begin(), v.end());
  ++next_grid_;
}

std::span<const double> HistoryBuffer::stage_u(long i, std::size_t j) const {
  check_stage(i);
  return {stage_u_[slot(i)].data() + j * n1_, n1_};
}

std::span<const double> HistoryBuffer::stage_v(long i, std::size_t j) const {
  check_stage(i);
  return {stage_v_[slot(i)].data() + j * n2_, n2_};
}

double HistoryBuffer::stage_time(long i, std::size_t j) const {
  return t0_ + static_cast<double>(i) * h_ + c_[j] * h_;
}

std::span<const double> HistoryBuffer::grid_u(long i) const {
  check_grid(i);
  return grid_u_[slot(i)];
}

std::span<const double> HistoryBuffer::grid_v(long i) const {
  check_grid(i);
  return grid_v_[slot(i)];
}

double HistoryBuffer::grid_time(long i) const { return t0_ + static_cast<double>(i) * h_; }

// ---------------------------------------------------------------------------
// Trajectory

std::optional<std::size_t> Trajectory::index_of(double t) const {
  if (times.empty() || !(h > 0.0)) return std::nullopt;
  const long n = std::lround((t - times.front()) / h);
  if (n < 0 || static_cast<std::size_t>(n) >= times.size()) return std::nullopt;
  if (std::abs(times[static_cast<std::size_t>(n)] - t) > 1e-9 * std::max(1.0, std::abs(t))) return std::nullopt;
  return static_cast<std::size_t>(n);
}

// ---------------------------------------------------------------------------
// Integrator

namespace {

InitialData resolve_initial(const DidaeProblem& problem, const std::optional<InitialData>& initial) {
  return initial ? *initial : InitialData{problem.psi, problem.phi};
}

const DidaeProblem& validated(const DidaeProblem& problem, const SolverConfig& config) {
  problem.validate();
  config.validate(problem);
  return problem;
}

}  // namespace

Integrator::Integrator(DidaeProblem problem, SolverConfig config, std::optional<InitialData> initial)
    : problem_(std::move(validated(problem, config))),
      config_(std::move(config)),
      initial_(resolve_initial(problem_, initial)),
      history_(problem_, initial_, config_.tableau, config_.m, config_.h()),
      h_(config_.h()) {
  u_ = checked_initial(initial_.psi, problem_.t0, problem_.n1, "psi");
  v_ = checked_initial(initial_.phi, problem_.t0, problem_.n2, "phi");
  history_.push_grid(0, u_, v_);
}

std::vector<double> Integrator::stage_times(long n) const {
  return cqrk::stage_times(n, problem_.t0, h_, config_.tableau);
}

Integrator::StageHistory Integrator::stage_history(long n) const {
  const std::size_t s = config_.tableau.stages();
  const auto times = stage_times(n);
  StageHistory hist;
  hist.p.assign(s, Vector(problem_.n3, 0.0));
  hist.l.assign(s, Vector(problem_.n4, 0.0));
  for (std::size_t j = 0; j < s; ++j) {
    for (int q = 1; q <= config_.m; ++q) {
      const long i = n - q;
      const double theta = history_.stage_time(i, j);
      const auto u = history_.stage_u(i, j);
      const auto v = history_.stage_v(i, j);
      add_scaled(hist.p[j], config_.alpha_rule.weight(q), problem_.eval_k1(times[j], theta, u, v));
      add_scaled(hist.l[j], config_.beta_rule.weight(q), problem_.eval_k2(times[j], theta, u, v));
    }
    for (double& x : hist.p[j]) x *= h_;
    for (double& x : hist.l[j]) x *= h_;
  }
  return hist;
}

Vector Integrator::stage_quadrature_p(std::size_t j, long n, const StageArrays& candidate) const {
  const double tj = stage_times(n).at(j);
  Vector acc(problem_.n3, 0.0);
  for (int q = 1; q <= config_.m; ++q) {
    const long i = n - q;
    add_scaled(acc, config_.alpha_rule.weight(q),
               problem_.eval_k1(tj, history_.stage_time(i, j), history_.stage_u(i, j), history_.stage_v(i, j)));
  }
  add_scaled(acc, config_.alpha_rule.weight(0), problem_.eval_k1(tj, tj, candidate.u_at(j), candidate.v_at(j)));
  for (double& x : acc) x *= h_;
  return acc;
}

Vector Integrator::stage_quadrature_l(std::size_t j, long n, const StageArrays& candidate) const {
  const double tj = stage_times(n).at(j);
  Vector acc(problem_.n4, 0.0);
  for (int q = 1; q <= config_.m; ++q) {
    const long i = n - q;
    add_scaled(acc, config_.beta_rule.weight(q),
               problem_.eval_k2(tj, history_.stage_time(i, j), history_.stage_u(i, j), history_.stage_v(i, j)));
  }
  add_scaled(acc, config_.beta_rule.weight(0), problem_.eval_k2(tj, tj, candidate.u_at(j), candidate.v_at(j)));
  for (double& x : acc) x *= h_;
  return acc;
}

double Integrator::tolerance(std::span<const double> x) const {
  return config_.newton_tol * std::max(1.0, norm_inf(x));
}

// x = [U_1 .. U_s, V_1 .. V_s]; residual rows
//   U_i - u_n - h sum_j a_ij f(t_j, U_j, p_j)
//   V_j - g(t_j, U_j, l_j)
// where p_j, l_j carry the implicit q = 0 self terms.
void Integrator::stage_residual(const StageHistory& hist, std::span<const double> x, std::vector<double>& times,
                                Vector& out, std::vector<Vector>* f_out) const {
  const std::size_t s = config_.tableau.stages();
  const std::size_t n1 = problem_.n1, n2 = problem_.n2;
  const double a0 = h_ * config_.alpha_rule.weight(0);
  const double b0 = h_ * config_.beta_rule.weight(0);
  const auto U = x.subspan(0, s * n1);
  const auto V = x.subspan(s * n1, s * n2);

  std::vector<Vector> F(s);
  out.assign(x.size(), 0.0);
  for (std::size_t j = 0; j < s; ++j) {
    const auto uj = U.subspan(j * n1, n1);
    const auto vj = V.subspan(j * n2, n2);
    Vector p = hist.p[j];
    add_scaled(p, a0, problem_.eval_k1(times[j], times[j], uj, vj));
    F[j] = problem_.eval_f(times[j], uj, p);
    Vector l = hist.l[j];
    add_scaled(l, b0, problem_.eval_k2(times[j], times[j], uj, vj));
    const Vector gj = problem_.eval_g(times[j], uj, l);
    for (std::size_t k = 0; k < n2; ++k) out[s * n1 + j * n2 + k] = vj[k] - gj[k];
  }
  const Matrix& a = config_.tableau.a();
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t k = 0; k < n1; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s; ++j) acc += a(i, j) * F[j][k];
      out[i * n1 + k] = U[i * n1 + k] - u_[k] - h_ * acc;
    }
  }
  if (f_out) *f_out = std::move(F);
}

StageSolution Integrator::solve_stages() const {
  const std::size_t s = config_.tableau.stages();
  const std::size_t n1 = problem_.n1, n2 = problem_.n2;
  const std::size_t dim = s * (n1 + n2);
  const long n = n_;
  auto times = stage_times(n);
  const StageHistory hist = stage_history(n);

  Vector x(dim);
  for (std::size_t j = 0; j < s; ++j) {
    std::copy(u_.begin(), u_.end(), x.begin() + static_cast<long>(j * n1));
    std::copy(v_.begin(), v_.end(), x.begin() + static_cast<long>(s * n1 + j * n2));
  }

  Vector r;
  stage_residual(hist, x, times, r, nullptr);
  double rnorm = norm_inf(r);
  int iterations = 0;

  Vector shifted(dim), r_shift, trial(dim), r_trial;
  while (true) {
    if (!std::isfinite(rnorm) || !all_finite(x))
      throw StageSolveError("stage solve: non-finite residual at step " + std::to_string(n), n, rnorm);
    if (rnorm <= tolerance(x)) break;
    if (iterations >= config_.newton_max_iter)
      throw StageSolveError("stage solve: no convergence in " + std::to_string(iterations) + " iterations at step " +
                                std::to_string(n),
                            n, rnorm);

    Matrix jac(dim, dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const double delta = config_.fd_jacobian_step * std::max(1.0, std::abs(x[k]));
      shifted = x;
      shifted[k] += delta;
      stage_residual(hist, shifted, times, r_shift, nullptr);
      for (std::size_t i = 0; i < dim; ++i) jac(i, k) = (r_shift[i] - r[i]) / delta;
    }
    const LuDecomposition lu(std::move(jac));
    if (lu.singular()) throw StageSolveError("stage solve: singular Jacobian at step " + std::to_string(n), n, rnorm);
    Vector neg_r(dim);
    for (std::size_t i = 0; i < dim; ++i) neg_r[i] = -r[i];
    const Vector dx = lu.solve(neg_r);

    // Halve the step up to 8 times while the residual fails to decrease; the
    // last trial is taken regardless.
    double lambda = 1.0;
    double trial_norm = std::numeric_limits<double>::infinity();
    for (int halving = 0; halving <= 8; ++halving) {
      for (std::size_t i = 0; i < dim; ++i) trial[i] = x[i] + lambda * dx[i];
      stage_residual(hist, trial, times, r_trial, nullptr);
      trial_norm = norm_inf(r_trial);
      if (trial_norm < rnorm) break;
      lambda *= 0.5;
    }
    x.swap(trial);
    r.swap(r_trial);
    rnorm = trial_norm;
    ++iterations;
  }

  StageSolution sol;
  sol.step = n;
  sol.stages = StageArrays(s, n1, n2);
  std::copy(x.begin(), x.begin() + static_cast<long>(s * n1), sol.stages.u.begin());
  std::copy(x.begin() + static_cast<long>(s * n1), x.end(), sol.stages.v.begin());
  stage_residual(hist, x, times, r, &sol.f_values);
  sol.residual = norm_inf(r);
  sol.iterations = iterations;
  return sol;
}

GridUpdate Integrator::advance(const StageSolution& solution) {
  if (solution.step != n_) throw std::logic_error("Integrator::advance: stage solution is for another step");
  const std::size_t s = config_.tableau.stages();
  const std::size_t n2 = problem_.n2;
  const long n = n_;

  GridUpdate out;
  out.u = u_;
  for (std::size_t j = 0; j < s; ++j) add_scaled(out.u, h_ * config_.tableau.b()[j], solution.f_values[j]);

  const long next = n + 1;
  const double t1 = history_.grid_time(next);
  Vector hist_l(problem_.n4, 0.0);
  for (int q = 1; q <= config_.m; ++q) {
    const long i = next - q;
    add_scaled(hist_l, config_.gamma_rule.weight(q),
               problem_.eval_k2(t1, history_.grid_time(i), history_.grid_u(i), history_.grid_v(i)));
  }
  for (double& x : hist_l) x *= h_;

  const double g0 = h_ * config_.gamma_rule.weight(0);
  auto self_term = [&](std::span<const double> v) {
    Vector k = problem_.eval_k2(t1, t1, out.u, v);
    for (double& x : k) x *= g0;
    return k;
  };
  auto relation = [&](const Vector& self) {
    Vector l = hist_l;
    add_scaled(l, 1.0, self);
    return problem_.eval_g(t1, out.u, l);
  };

  // Fixed-point iteration v <- g(t_{n+1}, u_{n+1}, l(v)); only the q = 0 term
  // depends on v, so the map contracts whenever h gamma_0 L3 L7 < 1.
  Vector v = v_;
  Vector self_v = self_term(v);
  int iterations = 0;
  int non_contracting = 0;
  double previous = std::numeric_limits<double>::infinity();
  bool converged = false;
  while (iterations < 200 && non_contracting < 20) {
    Vector next_v = relation(self_v);
    ++iterations;
    Vector self_next = self_term(next_v);
    double d = 0.0;
    for (std::size_t k = 0; k < n2; ++k) d = std::max(d, std::abs(next_v[k] - v[k]));
    v = std::move(next_v);
    if (!std::isfinite(d) || !all_finite(v))
      throw AlgebraicSolveError("algebraic update: non-finite iterate at step " + std::to_string(n), n);
    // Unchanged self term means v is an exact fixed point.
    if (self_next == self_v || d <= tolerance(v)) {
      converged = true;
      break;
    }
    self_v = std::move(self_next);
    if (d >= previous) ++non_contracting;
    previous = d;
  }

  if (!converged) {
    out.newton_fallback = true;
    auto residual = [&](const Vector& w) {
      Vector r = relation(self_term(w));
      for (std::size_t k = 0; k < n2; ++k) r[k] = w[k] - r[k];
      return r;
    };
    Vector r = residual(v);
    for (int it = 0;; ++it) {
      const double rnorm = norm_inf(r);
      if (!std::isfinite(rnorm))
        throw AlgebraicSolveError("algebraic update: non-finite residual at step " + std::to_string(n), n);
      if (rnorm <= tolerance(v)) break;
      if (it >= config_.newton_max_iter)
        throw AlgebraicSolveError("algebraic update: Newton fallback did not converge at step " + std::to_string(n), n);
      Matrix jac(n2, n2);
      for (std::size_t k = 0; k < n2; ++k) {
        Vector w = v;
        const double delta = config_.fd_jacobian_step * std::max(1.0, std::abs(v[k]));
        w[k] += delta;
        const Vector rs = residual(w);
        for (std::size_t i = 0; i < n2; ++i) jac(i, k) = (rs[i] - r[i]) / delta;
      }
      const LuDecomposition lu(std::move(jac));
      if (lu.singular())
        throw AlgebraicSolveError("algebraic update: singular Jacobian at step " + std::to_string(n), n);
      Vector neg_r(n2);
      for (std::size_t k = 0; k < n2; ++k) neg_r[k] = -r[k];
      const Vector dv = lu.solve(neg_r);
      for (std::size_t k = 0; k < n2; ++k) v[k] += dv[k];
      r = residual(v);
      ++iterations;
    }
  }
  out.v = std::move(v);
  out.algebraic_iterations = iterations;

  history_.push_stage(n, solution.stages);
  history_.push_grid(next, out.u, out.v);
  u_ = out.u;
  v_ = out.v;
  n_ = next;
  return out;
}

Trajectory integrate(const DidaeProblem& problem, const SolverConfig& config,
                     const std::optional<InitialData>& initial) {
  Integrator stepper(problem, config, initial);
  const double h = config.h();
  const long steps = static_cast<long>(std::ceil((config.t_end - problem.t0) / h - 1e-9));

  Trajectory traj;
  traj.h = h;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.times.push_back(problem.t0);
  traj.u.push_back(stepper.u());
  traj.v.push_back(stepper.v());
  traj.newton_iterations.push_back(0);
  traj.stage_residuals.push_back(0.0);

  for (long n = 0; n < steps; ++n) {
    StageSolution sol;
    try {
      sol = stepper.solve_stages();
      stepper.advance(sol);
    } catch (const StageSolveError& e) {
      traj.diverged = true;
      traj.divergence_step = n;
      traj.divergence_reason = e.what();
      break;
    } catch (const AlgebraicSolveError& e) {
      traj.diverged = true;
      traj.divergence_step = n;
      traj.divergence_reason = e.what();
      break;
    }
    traj.times.push_back(stepper.time());
    traj.u.push_back(stepper.u());
    traj.v.push_back(stepper.v());
    traj.newton_iterations.push_back(sol.iterations);
    traj.stage_residuals.push_back(sol.residual);

    const double size = std::max(norm_inf(stepper.u()), norm_inf(stepper.v()));
    if (!(size <= config.blowup_threshold)) {
      traj.diverged = true;
      traj.divergence_step = n + 1;
      traj.divergence_reason = "state norm exceeded blow-up threshold at step " + std::to_string(n + 1);
      break;
    }
  }
  return traj;
}

}  // namespace cqrk
