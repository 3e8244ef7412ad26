#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cqrk/problem.hpp"
#include "cqrk/solver.hpp"

namespace cqrk {

enum class ExampleId { ex1, ex2 };

struct ExampleSpec {
  ExampleId id = ExampleId::ex2;
  int n_s = 10;  // ex1 only
  Example1Forcing forcing = Example1Forcing::consistent;  // ex1 only
};

ExampleProblem build_example(const ExampleSpec& spec);
std::string example_name(ExampleId id);
/// Accepts "ex1", "1", "ex2", "2".
std::optional<ExampleId> parse_example(const std::string& text);

/// Additive perturbation of the initial functions on [t0 - tau, t0].
struct PerturbationSpec {
  TimeFn delta_psi;
  TimeFn delta_phi;
};

/// ex1: +0.5 on every component of psi and phi. ex2: delta psi = 0.5 (cos t, sin t),
/// delta phi = (0.5, 0.5).
PerturbationSpec standard_perturbation(const ExampleSpec& spec);
PerturbationSpec zero_perturbation(const DidaeProblem& problem);
InitialData perturbed_initial(const DidaeProblem& problem, const PerturbationSpec& pert);

/// max over sampled theta in [t0 - tau, t0] of max(|delta psi|, |delta phi|) in `norm`.
double initial_window_max(const DidaeProblem& problem, const PerturbationSpec& pert, const Norm& norm,
                          int samples = 1000);

/// Differences between a nominal and a perturbed run. w_norm / r_norm use the
/// example norm, e_inf / ea_inf the max norm.
struct ErrorSeries {
  std::vector<double> times;
  std::vector<double> w_norm;
  std::vector<double> r_norm;
  std::vector<double> e_inf;
  std::vector<double> ea_inf;
  Norm norm;
  bool diverged = false;
  std::optional<double> divergence_time;

  std::size_t size() const { return times.size(); }
  std::optional<std::size_t> index_of(double t) const;
};

ErrorSeries error_series(const Trajectory& nominal, const Trajectory& perturbed, const Norm& norm);

struct PerturbationRun {
  Trajectory nominal;
  Trajectory perturbed;
  ErrorSeries errors;
};

/// Integrates nominal and perturbed initial data with the same config.
PerturbationRun perturbation_run(const ExampleSpec& spec, const PerturbationSpec& pert, const SolverConfig& config,
                                 bool parallel = true);

/// Lobatto IIIC with the given compound rule for all three weight families.
SolverConfig default_config(const ExampleProblem& ex, int m, double t_end, const std::string& rule = "simpson");

/// E(t) and EA(t) at fixed times for one step size. NaN where the run stopped early.
struct TableColumn {
  int m = 0;
  double h = 0.0;
  std::vector<double> times;
  std::vector<double> e;
  std::vector<double> ea;
  bool diverged = false;
};

struct TableResult {
  std::string example;
  std::vector<TableColumn> columns;
};

/// Example 1 (n_s = 10) at t = pi/2, 3pi/2, 5pi/2.
TableResult table1(const std::vector<int>& m_values = {10, 100}, bool parallel = true);
/// Example 2 at t = 0.5, 1, 5, 10; h = 0.1 and 0.01 mean m = 10 and m = 100.
TableResult table2(const std::vector<double>& h_values = {0.1, 0.01}, bool parallel = true);

/// Published reference values for the two tables, same layout as above.
TableResult reference_table1();
TableResult reference_table2();

/// Example 1 (n_s = 10) with the given tableau and the standard perturbation.
ErrorSeries divergence_demo(int m = 100, const std::string& tableau = "rk4", double t_end = -1.0);

struct ConvergenceResult {
  double t_eval = 0.0;
  std::vector<int> m;
  std::vector<double> h;
  std::vector<double> u_error;
  std::vector<double> v_error;
  std::vector<double> u_order;  // log2(e(h_i) / e(h_{i+1})) scaled by log2(h_i / h_{i+1})
  std::vector<double> v_order;
};

/// Errors against the closed-form solution at t_eval (default: 2 for ex2, pi/2
/// for ex1) in the example norm. m_list must be strictly increasing, >= 3 entries.
ConvergenceResult convergence_study(const ExampleSpec& spec, const std::vector<int>& m_list,
                                    std::optional<double> t_eval = std::nullopt, bool parallel = true);

struct StabilityWitness {
  double window_max = 0.0;
  double series_max = 0.0;
  double final_w = 0.0;
  double final_r = 0.0;
  bool bounded = false;  // series_max <= factor * window_max
  bool decayed = false;  // final_w, final_r <= final_tol
};

StabilityWitness stability_witness(const ErrorSeries& errors, double window_max, double factor = 10.0,
                                   double final_tol = 1e-10);

}  // namespace cqrk
