#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cqrk/linalg.hpp"
#include "cqrk/stability_criteria.hpp"

namespace cqrk {

/// f(t, u, p) and g(t, u, q): the differential right-hand side and the explicit
/// algebraic relation.
using RhsFn = std::function<Vector(double t, std::span<const double> u, std::span<const double> p)>;
/// K(t, theta, u(theta), v(theta)): integrand over the trailing delay window.
using KernelFn = std::function<Vector(double t, double theta, std::span<const double> u, std::span<const double> v)>;
/// Initial function on [t0 - tau, t0], or any time-indexed vector map.
using TimeFn = std::function<Vector(double t)>;

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Semi-explicit delay-integro-differential-algebraic system
///
///   u'(t) = f(t, u, int_{t-tau}^t K1(t, s, u(s), v(s)) ds)
///   v(t)  = g(t, u, int_{t-tau}^t K2(t, s, u(s), v(s)) ds)
///
/// with u = psi, v = phi on [t0 - tau, t0]. All maps must be pure so one
/// instance can be shared by concurrent integrations.
struct DidaeProblem {
  std::string name;
  std::size_t n1 = 0, n2 = 0, n3 = 0, n4 = 0;
  double tau = 1.0;
  double t0 = 0.0;
  RhsFn f;
  RhsFn g;
  KernelFn k1;
  KernelFn k2;
  TimeFn psi;
  TimeFn phi;

  /// Checked evaluators: throw EvaluationError when a map returns the wrong
  /// dimension or is missing.
  Vector eval_f(double t, std::span<const double> u, std::span<const double> p) const;
  Vector eval_g(double t, std::span<const double> u, std::span<const double> q) const;
  Vector eval_k1(double t, double theta, std::span<const double> u, std::span<const double> v) const;
  Vector eval_k2(double t, double theta, std::span<const double> u, std::span<const double> v) const;
  Vector eval_psi(double t) const;
  Vector eval_phi(double t) const;

  void validate() const;
};

/// Replacement initial functions, e.g. a perturbed (psi~, phi~) pair.
struct InitialData {
  TimeFn psi;
  TimeFn phi;
};

struct ExactSolution {
  TimeFn u;
  TimeFn v;
};

struct ConsistencyReport {
  double diff_residual = 0.0;  // |psi'(t0) - f(t0, psi(t0), int K1)|
  double alg_residual = 0.0;   // |phi(t0) - g(t0, psi(t0), int K2)|
};

/// Checks the initial-data compatibility conditions at t0. psi' uses a
/// second-order backward difference (psi is only defined up to t0) and the
/// window integrals use compound Simpson with fine_m subintervals.
ConsistencyReport verify_consistency(const DidaeProblem& problem, double fd_step = 1e-5, int fine_m = 2000,
                                     const InitialData* initial = nullptr);

enum class NormKind { euclidean, weighted_l2, inf };

/// Vector norm; weighted_l2 is sqrt(ds * sum |x_i|^2) as used for the
/// method-of-lines grid functions.
struct Norm {
  NormKind kind = NormKind::euclidean;
  double ds = 1.0;

  double operator()(std::span<const double> x) const;
  std::string describe() const;
};

/// Which of the two Example 1 forcing variants to build (see example_problems.cpp).
enum class Example1Forcing { consistent, as_printed };

/// A built-in problem with its closed-form solution, Lipschitz metadata and the
/// norm used to report perturbation errors.
struct ExampleProblem {
  DidaeProblem problem;
  ExactSolution exact;
  ProblemConstants constants;
  Norm norm;
};

/// Method-of-lines semi-discretization of the heat-type example with
/// n_s - 1 interior nodes, tau = pi/2, t0 = 0.
ExampleProblem build_example1(int n_s, Example1Forcing forcing = Example1Forcing::consistent);
/// The two-component example with tau = 1, t0 = 0 and forcings constructed so
/// that u = e^{-t}(cos t, sin t), v = e^{-t}(1 - t, 1 + t) is exact.
ExampleProblem build_example2();

struct Trajectory;

struct ExactErrorSeries {
  std::vector<double> times;
  std::vector<double> u_error;
  std::vector<double> v_error;
};

/// Per-time-point |u_n - u(t_n)| and |v_n - v(t_n)| in the chosen norm.
ExactErrorSeries exact_error(const Trajectory& trajectory, const ExactSolution& exact, const Norm& norm);

/// Same comparison against a second trajectory on the same grid; throws
/// std::invalid_argument on grid mismatch.
ExactErrorSeries compare_trajectories(const Trajectory& a, const Trajectory& b, const Norm& norm);

}  // namespace cqrk
