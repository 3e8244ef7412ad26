#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqrk/linalg.hpp"
#include "cqrk/problem.hpp"
#include "cqrk/quadrature.hpp"
#include "cqrk/tableau.hpp"

namespace cqrk {

struct SolverConfig {
  int m = 0;  // subintervals per delay window, h = tau / m
  ButcherTableau tableau;
  QuadratureRule alpha_rule;  // stage integrals of K1
  QuadratureRule beta_rule;   // stage integrals of K2
  QuadratureRule gamma_rule;  // grid integral of K2 for v_{n+1}
  double t_end = 0.0;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  double fd_jacobian_step = 1e-7;
  double blowup_threshold = 1e12;

  double h() const { return alpha_rule.h(); }
  /// Throws std::invalid_argument unless the rules share m and h, m h = tau
  /// and the tolerances are sane.
  void validate(const DidaeProblem& problem) const;
};

/// Config with the same named compound rule for all three weight families.
SolverConfig make_config(ButcherTableau tableau, int m, double tau, double t_end,
                         const std::string& rule = "simpson");

/// t0 + n h + c_j h for every stage j.
std::vector<double> stage_times(long n, double t0, double h, const ButcherTableau& tableau);

/// Stage values of one step: s blocks of n1 (u) and n2 (v), stage-major.
struct StageArrays {
  std::size_t s = 0, n1 = 0, n2 = 0;
  Vector u;
  Vector v;

  StageArrays() = default;
  StageArrays(std::size_t stages, std::size_t dim_u, std::size_t dim_v)
      : s(stages), n1(dim_u), n2(dim_v), u(stages * dim_u, 0.0), v(stages * dim_v, 0.0) {}

  std::span<double> u_at(std::size_t j) { return {u.data() + j * n1, n1}; }
  std::span<double> v_at(std::size_t j) { return {v.data() + j * n2, n2}; }
  std::span<const double> u_at(std::size_t j) const { return {u.data() + j * n1, n1}; }
  std::span<const double> v_at(std::size_t j) const { return {v.data() + j * n2, n2}; }
};

class HistoryError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Rolling window of the last m+1 stage-level and grid-level records. Records
/// with negative index are filled from the initial functions at construction,
/// so every lookup inside the window is a plain ring access.
class HistoryBuffer {
 public:
  HistoryBuffer(const DidaeProblem& problem, const InitialData& initial, const ButcherTableau& tableau, int m,
                double h);

  int m() const { return m_; }
  /// Index the next push_stage call must carry.
  long next_stage() const { return next_stage_; }
  long next_grid() const { return next_grid_; }

  void push_stage(long n, const StageArrays& stages);
  void push_grid(long n, std::span<const double> u, std::span<const double> v);

  std::span<const double> stage_u(long i, std::size_t j) const;
  std::span<const double> stage_v(long i, std::size_t j) const;
  double stage_time(long i, std::size_t j) const;

  std::span<const double> grid_u(long i) const;
  std::span<const double> grid_v(long i) const;
  double grid_time(long i) const;

 private:
  std::size_t slot(long i) const;
  void check_stage(long i) const;
  void check_grid(long i) const;

  int m_;
  double t0_, h_;
  std::size_t s_, n1_, n2_;
  Vector c_;
  long next_stage_ = 0;
  long next_grid_ = 0;
  std::vector<Vector> stage_u_, stage_v_;
  std::vector<Vector> grid_u_, grid_v_;
};

class StageSolveError : public std::runtime_error {
 public:
  StageSolveError(const std::string& what, long step, double residual)
      : std::runtime_error(what), step(step), residual(residual) {}
  long step;
  double residual;
};

class AlgebraicSolveError : public std::runtime_error {
 public:
  AlgebraicSolveError(const std::string& what, long step) : std::runtime_error(what), step(step) {}
  long step;
};

struct StageSolution {
  long step = 0;
  StageArrays stages;
  std::vector<Vector> f_values;  // f(t_j, U_j, p_j) at the converged stages
  double residual = 0.0;         // final max-norm of the coupled residual
  int iterations = 0;
};

struct GridUpdate {
  Vector u;
  Vector v;
  int algebraic_iterations = 0;
  bool newton_fallback = false;
};

struct Trajectory {
  double h = 0.0;
  std::vector<double> times;
  std::vector<Vector> u;
  std::vector<Vector> v;
  std::vector<int> newton_iterations;  // per time point; 0 at t0
  std::vector<double> stage_residuals; // per time point; 0 at t0
  bool diverged = false;
  std::optional<long> divergence_step;
  std::string divergence_reason;

  std::size_t size() const { return times.size(); }
  /// Index of the grid point at time t, if it exists.
  std::optional<std::size_t> index_of(double t) const;
};

/// The CQRK stepper: implicit Runge-Kutta stages coupled to compound-quadrature
/// approximations of both delay integrals, with an implicit algebraic update at
/// each grid point. One instance owns its history and runs strictly in order.
class Integrator {
 public:
  Integrator(DidaeProblem problem, SolverConfig config, std::optional<InitialData> initial = std::nullopt);

  long step_index() const { return n_; }
  double time() const { return problem_.t0 + static_cast<double>(n_) * h_; }
  const Vector& u() const { return u_; }
  const Vector& v() const { return v_; }
  const HistoryBuffer& history() const { return history_; }
  const SolverConfig& config() const { return config_; }
  const DidaeProblem& problem() const { return problem_; }

  std::vector<double> stage_times(long n) const;

  /// h sum_{q=0}^m alpha_q K1(t_j^(n), t_j^(n-q), u_j^(n-q), v_j^(n-q)); the q=0
  /// term reads the candidate stage values, the rest comes from history.
  Vector stage_quadrature_p(std::size_t j, long n, const StageArrays& candidate) const;
  /// As stage_quadrature_p with K2 and the beta weights.
  Vector stage_quadrature_l(std::size_t j, long n, const StageArrays& candidate) const;

  /// Damped Newton solve of the coupled stage system for the current step.
  /// Throws StageSolveError.
  StageSolution solve_stages() const;

  /// Forms u_{n+1}, solves the implicit algebraic relation for v_{n+1}, pushes
  /// history and moves to the next step. Throws AlgebraicSolveError.
  GridUpdate advance(const StageSolution& solution);

 private:
  struct StageHistory {
    std::vector<Vector> p;  // q >= 1 part of the K1 sums, per stage
    std::vector<Vector> l;  // q >= 1 part of the K2 sums, per stage
  };

  StageHistory stage_history(long n) const;
  void stage_residual(const StageHistory& hist, std::span<const double> x, std::vector<double>& times,
                      Vector& out, std::vector<Vector>* f_out) const;
  double tolerance(std::span<const double> x) const;

  DidaeProblem problem_;
  SolverConfig config_;
  InitialData initial_;
  HistoryBuffer history_;
  double h_;
  long n_ = 0;
  Vector u_;
  Vector v_;
};

/// Steps from t0 to t_end. A failed solve or a state norm above the blow-up
/// threshold stops the run and sets `diverged`; that is a result, not an error.
Trajectory integrate(const DidaeProblem& problem, const SolverConfig& config,
                     const std::optional<InitialData>& initial = std::nullopt);

}  // namespace cqrk
