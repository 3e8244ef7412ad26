#include <array>
#include <cmath>
#include <numbers>

#include "cqrk/problem.hpp"

namespace cqrk {

namespace {

using std::cos;
using std::exp;
using std::sin;

// Example 1 forcings. With y = a cos t, z = a sin t (a = s^2 - s) the window
// integrals are
//   int 2 y z            = -a^2 cos 2t
//   int sin cos2 * y z   =  a^2 (P(sin t) - P(-cos t)),  P(x) = x^3/3 - 2x^5/5
// which gives the `consistent` pair below. The `as_printed` pair is the
// published one; it leaves a residual against y, z of order 1e-2.
double poly_p(double x) { return x * x * x / 3.0 - 2.0 * std::pow(x, 5) / 5.0; }

double ex1_f1(Example1Forcing forcing, double a, double t) {
  const double sign = forcing == Example1Forcing::consistent ? -1.0 : 1.0;
  return sign * a * sin(t) - 2.0 * cos(t) + a * a * cos(2.0 * t);
}

double ex1_f2(Example1Forcing forcing, double a, double t) {
  const double base = -a * a * sin(2.0 * t) - 2.0 * a * sin(t);
  if (forcing == Example1Forcing::as_printed) return base - 0.125 * a * a * (sin(2.0 * t) - cos(2.0 * t));
  return base - 0.5 * a * a * (poly_p(sin(t)) - poly_p(-cos(t)));
}

// Definite integrals over sigma in [0, 1] used by the Example 2 forcings, from
// the antiderivatives of e^s sin s cos s, e^s sin^2 s, e^s cos^2 s,
// e^s sin s, e^s cos s, s e^s sin s and s e^s cos s.
struct Ex2Moments {
  double sin_cos, sin2, cos2, sin1, cos1, s_sin, s_cos;
};

Ex2Moments ex2_moments() {
  auto diff = [](auto&& F) { return F(1.0) - F(0.0); };
  Ex2Moments m{};
  m.sin_cos = diff([](double s) { return exp(s) * (sin(2 * s) - 2 * cos(2 * s)) / 10.0; });
  m.sin2 = diff([](double s) { return exp(s) / 2.0 - exp(s) * (cos(2 * s) + 2 * sin(2 * s)) / 10.0; });
  m.cos2 = diff([](double s) { return exp(s) / 2.0 + exp(s) * (cos(2 * s) + 2 * sin(2 * s)) / 10.0; });
  m.sin1 = diff([](double s) { return exp(s) * (sin(s) - cos(s)) / 2.0; });
  m.cos1 = diff([](double s) { return exp(s) * (sin(s) + cos(s)) / 2.0; });
  m.s_sin = diff([](double s) { return s * exp(s) * (sin(s) - cos(s)) / 2.0 + exp(s) * cos(s) / 2.0; });
  m.s_cos = diff([](double s) { return s * exp(s) * (sin(s) + cos(s)) / 2.0 - exp(s) * sin(s) / 2.0; });
  return m;
}

Vector ex2_u(double t) { return {exp(-t) * cos(t), exp(-t) * sin(t)}; }
Vector ex2_v(double t) { return {exp(-t) * (1.0 - t), exp(-t) * (1.0 + t)}; }

}  // namespace

ExampleProblem build_example1(int n_s, Example1Forcing forcing) {
  if (n_s < 2) throw std::invalid_argument("build_example1: n_s must be >= 2");
  const std::size_t n = static_cast<std::size_t>(n_s) - 1;
  const double ds = 1.0 / n_s;
  Vector a(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = static_cast<double>(i + 1) * ds;
    a[i] = s * s - s;
  }

  ExampleProblem ex;
  DidaeProblem& p = ex.problem;
  p.name = "ex1";
  p.n1 = p.n2 = p.n3 = p.n4 = n;
  p.tau = std::numbers::pi / 2.0;
  p.t0 = 0.0;

  const double inv_ds2 = 1.0 / (ds * ds);
  p.f = [a, inv_ds2, forcing](double t, std::span<const double> u, std::span<const double> q) {
    const std::size_t n = a.size();
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double left = i > 0 ? u[i - 1] : 0.0;
      const double right = i + 1 < n ? u[i + 1] : 0.0;
      out[i] = (right - 2.0 * u[i] + left) * inv_ds2 + q[i] + ex1_f1(forcing, a[i], t);
    }
    return out;
  };
  // 2(y+1) z + 0.5 * int(...) + f2 = 0 solved for z.
  p.g = [a, forcing](double t, std::span<const double> u, std::span<const double> q) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
      out[i] = -(0.5 * q[i] + ex1_f2(forcing, a[i], t)) / (2.0 * (u[i] + 1.0));
    return out;
  };
  p.k1 = [](double, double, std::span<const double> u, std::span<const double> v) {
    Vector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = 2.0 * u[i] * v[i];
    return out;
  };
  p.k2 = [](double, double theta, std::span<const double> u, std::span<const double> v) {
    const double w = sin(theta) * cos(2.0 * theta);
    Vector out(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) out[i] = w * u[i] * v[i];
    return out;
  };
  auto y = [a](double t) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * cos(t);
    return out;
  };
  auto z = [a](double t) {
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * sin(t);
    return out;
  };
  p.psi = y;
  p.phi = z;
  ex.exact = {y, z};

  const double half = std::sin(std::numbers::pi / (2.0 * n_s));
  ex.constants.alpha = -4.0 * n_s * n_s * half * half;
  ex.constants.lipschitz = {1.0, 0.5, 0.5, 0.5, 0.5, 0.25, 0.25};
  ex.constants.tau = p.tau;
  ex.norm = {NormKind::weighted_l2, ds};
  return ex;
}

ExampleProblem build_example2() {
  const Ex2Moments mo = ex2_moments();

  // Window integrals of the kernels along the exact solution.
  auto k1_int = [](double t) -> std::array<double, 2> {
    return {exp(-t) * (cos(t - 1.0) - cos(t) + 1.5 - t), exp(-t) * (sin(t) - sin(t - 1.0) - t - 0.5)};
  };
  auto k2_int = [mo](double t) -> std::array<double, 2> {
    const double j1 = exp(-t) * (sin(t) * mo.sin_cos - cos(t) * mo.sin2 - 0.25 * (1.0 - t) * mo.sin1 - 0.25 * mo.s_sin);
    const double j2 = exp(-t) * (cos(t) * mo.cos2 + sin(t) * mo.sin_cos + 0.25 * (1.0 + t) * mo.cos1 - 0.25 * mo.s_cos);
    return {0.25 * j1, 0.25 * j2};
  };

  ExampleProblem ex;
  DidaeProblem& p = ex.problem;
  p.name = "ex2";
  p.n1 = p.n2 = p.n3 = p.n4 = 2;
  p.tau = 1.0;
  p.t0 = 0.0;

  p.f = [k1_int](double t, std::span<const double> u, std::span<const double> q) {
    const Vector ue = ex2_u(t);
    const double du1 = -exp(-t) * (cos(t) + sin(t));
    const double du2 = exp(-t) * (cos(t) - sin(t));
    const auto I = k1_int(t);
    const double f1 = du1 - t * t * exp(-t) + 50.0 * ue[0] - ue[1] * I[0];
    const double f2 = du2 - 1.0 - sin(t * t) + 50.0 * ue[1] - ue[0] * I[1];
    return Vector{t * t * exp(-t) - 50.0 * u[0] + u[1] * q[0] + f1,
                  1.0 + sin(t * t) - 50.0 * u[1] + u[0] * q[1] + f2};
  };
  p.g = [k2_int](double t, std::span<const double> u, std::span<const double> q) {
    const Vector ue = ex2_u(t);
    const Vector ve = ex2_v(t);
    const auto J = k2_int(t);
    const double g1 = ve[0] + 0.1 * ue[1] - J[0];
    const double g2 = ve[1] - 0.2 * ue[0] - J[1];
    return Vector{-0.1 * u[1] + q[0] + g1, 0.2 * u[0] + q[1] + g2};
  };
  p.k1 = [](double t, double theta, std::span<const double> u, std::span<const double> v) {
    const double w = exp(theta - t);
    return Vector{w * (u[1] + v[0]), w * (u[0] - v[1])};
  };
  p.k2 = [](double t, double theta, std::span<const double> u, std::span<const double> v) {
    return Vector{0.25 * sin(t - theta) * (u[1] - 0.25 * v[0]), 0.25 * cos(t - theta) * (u[0] + 0.25 * v[1])};
  };
  p.psi = ex2_u;
  p.phi = ex2_v;
  ex.exact = {ex2_u, ex2_v};

  ex.constants.alpha = -50.0;
  ex.constants.lipschitz = {1.0, 0.2, 0.25, 2.0, 2.0, 2.0, 0.5};
  ex.constants.tau = 1.0;
  ex.norm = {NormKind::euclidean, 1.0};
  return ex;
}

}  // namespace cqrk
