#include "cqrk/problem.hpp"

#include <cmath>

#include "cqrk/quadrature.hpp"
#include "cqrk/solver.hpp"

namespace cqrk {

namespace {

Vector checked(const char* what, const std::string& problem, std::size_t expected, Vector value) {
  if (value.size() != expected)
    throw EvaluationError(problem + ": " + what + " returned dimension " + std::to_string(value.size()) +
                          ", expected " + std::to_string(expected));
  return value;
}

template <class Fn>
const Fn& require(const Fn& fn, const char* what, const std::string& problem) {
  if (!fn) throw EvaluationError(problem + ": map " + what + " is not set");
  return fn;
}

}  // namespace

Vector DidaeProblem::eval_f(double t, std::span<const double> u, std::span<const double> p) const {
  return checked("f", name, n1, require(f, "f", name)(t, u, p));
}

Vector DidaeProblem::eval_g(double t, std::span<const double> u, std::span<const double> q) const {
  return checked("g", name, n2, require(g, "g", name)(t, u, q));
}

Vector DidaeProblem::eval_k1(double t, double theta, std::span<const double> u, std::span<const double> v) const {
  return checked("K1", name, n3, require(k1, "K1", name)(t, theta, u, v));
}

Vector DidaeProblem::eval_k2(double t, double theta, std::span<const double> u, std::span<const double> v) const {
  return checked("K2", name, n4, require(k2, "K2", name)(t, theta, u, v));
}

Vector DidaeProblem::eval_psi(double t) const { return checked("psi", name, n1, require(psi, "psi", name)(t)); }

Vector DidaeProblem::eval_phi(double t) const { return checked("phi", name, n2, require(phi, "phi", name)(t)); }

void DidaeProblem::validate() const {
  if (n1 == 0 || n2 == 0 || n3 == 0 || n4 == 0) throw std::invalid_argument(name + ": dimensions must be positive");
  if (!(tau > 0.0)) throw std::invalid_argument(name + ": tau must be positive");
  if (!f || !g || !k1 || !k2 || !psi || !phi) throw std::invalid_argument(name + ": every map must be set");
}

ConsistencyReport verify_consistency(const DidaeProblem& problem, double fd_step, int fine_m,
                                     const InitialData* initial) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("verify_consistency: fd_step must be positive");
  if (fine_m < 100 || fine_m % 2 != 0) throw std::invalid_argument("verify_consistency: fine_m must be even and >= 100");
  problem.validate();

  auto psi = [&](double t) { return initial ? checked("psi", problem.name, problem.n1, initial->psi(t)) : problem.eval_psi(t); };
  auto phi = [&](double t) { return initial ? checked("phi", problem.name, problem.n2, initial->phi(t)) : problem.eval_phi(t); };

  const double t0 = problem.t0;
  const QuadratureRule fine = compound_simpson(fine_m, problem.tau);
  std::vector<Vector> k1_samples, k2_samples;
  k1_samples.reserve(fine_m + 1);
  k2_samples.reserve(fine_m + 1);
  for (int q = 0; q <= fine_m; ++q) {
    const double theta = t0 - problem.tau + q * fine.h();
    const Vector u = psi(theta);
    const Vector v = phi(theta);
    k1_samples.push_back(problem.eval_k1(t0, theta, u, v));
    k2_samples.push_back(problem.eval_k2(t0, theta, u, v));
  }
  const Vector p = cqrk::apply(fine, k1_samples);
  const Vector q = cqrk::apply(fine, k2_samples);

  const Vector u0 = psi(t0);
  const Vector u1 = psi(t0 - fd_step);
  const Vector u2 = psi(t0 - 2.0 * fd_step);
  const Vector rhs = problem.eval_f(t0, u0, p);
  Vector diff(problem.n1);
  for (std::size_t i = 0; i < problem.n1; ++i)
    diff[i] = (3.0 * u0[i] - 4.0 * u1[i] + u2[i]) / (2.0 * fd_step) - rhs[i];

  const Vector v0 = phi(t0);
  const Vector alg = problem.eval_g(t0, u0, q);
  Vector alg_diff(problem.n2);
  for (std::size_t i = 0; i < problem.n2; ++i) alg_diff[i] = v0[i] - alg[i];

  return {norm_2(diff), norm_2(alg_diff)};
}

double Norm::operator()(std::span<const double> x) const {
  switch (kind) {
    case NormKind::euclidean:
      return norm_2(x);
    case NormKind::weighted_l2:
      return std::sqrt(ds) * norm_2(x);
    case NormKind::inf:
      return norm_inf(x);
  }
  return 0.0;
}

std::string Norm::describe() const {
  switch (kind) {
    case NormKind::euclidean:
      return "euclidean";
    case NormKind::weighted_l2:
      return "weighted_l2(ds=" + std::to_string(ds) + ")";
    case NormKind::inf:
      return "inf";
  }
  return "?";
}

namespace {

double difference_norm(const Norm& norm, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("difference_norm: dimension mismatch");
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm(d);
}

}  // namespace

ExactErrorSeries exact_error(const Trajectory& trajectory, const ExactSolution& exact, const Norm& norm) {
  ExactErrorSeries out;
  out.times = trajectory.times;
  out.u_error.reserve(trajectory.size());
  out.v_error.reserve(trajectory.size());
  for (std::size_t n = 0; n < trajectory.size(); ++n) {
    const double t = trajectory.times[n];
    out.u_error.push_back(difference_norm(norm, trajectory.u[n], exact.u(t)));
    out.v_error.push_back(difference_norm(norm, trajectory.v[n], exact.v(t)));
  }
  return out;
}

ExactErrorSeries compare_trajectories(const Trajectory& a, const Trajectory& b, const Norm& norm) {
  if (std::abs(a.h - b.h) > 1e-12 * std::max(a.h, b.h))
    throw std::invalid_argument("compare_trajectories: step sizes differ");
  const std::size_t count = std::min(a.size(), b.size());
  ExactErrorSeries out;
  for (std::size_t n = 0; n < count; ++n) {
    if (std::abs(a.times[n] - b.times[n]) > 1e-12 * std::max(1.0, std::abs(a.times[n])))
      throw std::invalid_argument("compare_trajectories: time grids differ at index " + std::to_string(n));
    out.times.push_back(a.times[n]);
    out.u_error.push_back(difference_norm(norm, a.u[n], b.u[n]));
    out.v_error.push_back(difference_norm(norm, a.v[n], b.v[n]));
  }
  return out;
}

}  // namespace cqrk
