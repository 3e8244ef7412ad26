#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cqrk/experiments.hpp"
#include "cqrk/solver.hpp"

using namespace cqrk;

namespace {

// u' = lambda u, v = 0 and both kernels zero: a plain ODE.
DidaeProblem scalar_ode(double lambda, double tau = 1.0) {
  DidaeProblem p;
  p.name = "scalar";
  p.n1 = p.n2 = p.n3 = p.n4 = 1;
  p.tau = tau;
  p.f = [lambda](double, std::span<const double> u, std::span<const double>) { return Vector{lambda * u[0]}; };
  p.g = [](double, std::span<const double>, std::span<const double>) { return Vector{0.0}; };
  p.k1 = [](double, double, std::span<const double>, std::span<const double>) { return Vector{0.0}; };
  p.k2 = p.k1;
  p.psi = [lambda](double t) { return Vector{std::exp(lambda * t)}; };
  p.phi = [](double) { return Vector{0.0}; };
  return p;
}

double stability_function(const std::string& name, double z) {
  if (name == "lobatto-iiic-2") return 1.0 / (1.0 - z + z * z / 2.0);
  if (name == "backward-euler") return 1.0 / (1.0 - z);
  if (name == "implicit-midpoint") return (1.0 + z / 2.0) / (1.0 - z / 2.0);
  return 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
}

}  // namespace

TEST_CASE("linear ODE reproduces the stability function of each tableau") {
  const double lambda = -3.0;
  for (const char* name : {"lobatto-iiic-2", "backward-euler", "implicit-midpoint", "rk4"}) {
    const auto p = scalar_ode(lambda);
    const SolverConfig cfg = make_config(*builtin_tableau(name), 10, 1.0, 2.0);
    const Trajectory tr = integrate(p, cfg);
    REQUIRE(tr.size() == 21);
    const double r = stability_function(name, lambda * 0.1);
    for (std::size_t n = 0; n < tr.size(); ++n)
      CHECK(tr.u[n][0] == doctest::Approx(std::pow(r, static_cast<double>(n))).epsilon(1e-11));
  }
}

TEST_CASE("second order on a non-stiff problem") {
  std::vector<double> err;
  for (int m : {10, 20, 40}) {
    const Trajectory tr = integrate(scalar_ode(-1.0), make_config(lobatto_iiic_2(), m, 1.0, 2.0));
    err.push_back(std::abs(tr.u.back()[0] - std::exp(-2.0)));
  }
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.03));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.03));
}

TEST_CASE("example 2 approaches order 2 once h lambda is moderate") {
  const auto ex = build_example2();
  std::vector<double> err;
  for (int m : {80, 160, 320}) {
    const Trajectory tr = integrate(ex.problem, default_config(ex, m, 2.0));
    const auto idx = tr.index_of(2.0);
    REQUIRE(idx);
    Vector d = tr.u[*idx];
    const Vector e = ex.exact.u(2.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= e[i];
    err.push_back(ex.norm(d));
  }
  CHECK(std::log2(err[0] / err[1]) > 1.75);
  CHECK(std::log2(err[1] / err[2]) > 1.85);
}

TEST_CASE("stage quadrature is exact for a kernel quadratic in theta") {
  DidaeProblem p = scalar_ode(-1.0, 1.0);
  p.n3 = 1;
  p.k1 = [](double, double th, std::span<const double>, std::span<const double>) { return Vector{th * th}; };
  p.f = [](double, std::span<const double> u, std::span<const double> q) { return Vector{-u[0] + q[0]}; };
  Integrator it(p, make_config(lobatto_iiic_2(), 4, 1.0, 3.0));
  for (int step = 0; step < 6; ++step) {
    const long n = it.step_index();
    const auto times = it.stage_times(n);
    StageArrays candidate(2, 1, 1);
    for (std::size_t j = 0; j < 2; ++j) {
      const double t = times[j];
      const double exact = (t * t * t - (t - 1.0) * (t - 1.0) * (t - 1.0)) / 3.0;
      CHECK(it.stage_quadrature_p(j, n, candidate)[0] == doctest::Approx(exact).epsilon(1e-13));
    }
    it.advance(it.solve_stages());
  }
}

TEST_CASE("stage quadrature reads history at the shifted stage times") {
  // K1 = u(theta) with u from psi on the window: the sum must use psi at t_j^(n-q).
  DidaeProblem p = scalar_ode(0.0, 1.0);
  p.psi = [](double t) { return Vector{t}; };
  p.k1 = [](double, double, std::span<const double> u, std::span<const double>) { return Vector{u[0]}; };
  Integrator it(p, make_config(lobatto_iiic_2(), 2, 1.0, 1.0));
  StageArrays candidate(2, 1, 1);
  candidate.u = {0.0, 0.5};  // values at t_0^(0) = 0 and t_1^(0) = 0.5
  // stage 1 (c = 1): nodes 0.5, 0, -0.5 -> integral of theta over [-0.5, 0.5] = 0.
  CHECK(it.stage_quadrature_p(1, 0, candidate)[0] == doctest::Approx(0.0).epsilon(1e-15));
  // stage 0 (c = 0): nodes 0, -0.5, -1 -> -0.5.
  CHECK(it.stage_quadrature_p(0, 0, candidate)[0] == doctest::Approx(-0.5));
}

TEST_CASE("implicit algebraic update solves its own relation") {
  // v = 0.5 u + l, K2 = v; the q = 0 term makes the grid update implicit.
  DidaeProblem p = scalar_ode(-1.0, 1.0);
  p.g = [](double, std::span<const double> u, std::span<const double> l) { return Vector{0.5 * u[0] + l[0]}; };
  p.k2 = [](double, double, std::span<const double>, std::span<const double> v) { return Vector{0.25 * v[0]}; };
  p.phi = [](double t) { return Vector{0.5 * std::exp(-t)}; };
  const SolverConfig cfg = make_config(lobatto_iiic_2(), 4, 1.0, 2.0);
  Integrator it(p, cfg);
  for (int step = 0; step < 8; ++step) {
    const GridUpdate up = it.advance(it.solve_stages());
    const long n1 = it.step_index();
    double l = 0.0;
    for (int q = 0; q <= 4; ++q) l += cfg.gamma_rule.weight(static_cast<std::size_t>(q)) * 0.25 * it.history().grid_v(n1 - q)[0];
    l *= cfg.h();
    CHECK(std::abs(up.v[0] - (0.5 * up.u[0] + l)) <= 1e-13);
    CHECK_FALSE(up.newton_fallback);
  }
}

TEST_CASE("zero K2 self term converges in one fixed-point pass") {
  Integrator it(scalar_ode(-1.0), make_config(lobatto_iiic_2(), 2, 1.0, 1.0));
  const auto sol = it.solve_stages();
  CHECK(sol.iterations <= 2);
  CHECK(sol.residual <= 1e-12);
  CHECK(it.advance(sol).algebraic_iterations == 1);
}

TEST_CASE("history buffer") {
  const auto ex = build_example2();
  const auto tab = lobatto_iiic_2();
  HistoryBuffer hb(ex.problem, InitialData{ex.problem.psi, ex.problem.phi}, tab, 4, 0.25);
  CHECK(hb.next_stage() == 0);
  CHECK(hb.next_grid() == 0);
  CHECK(hb.stage_time(-1, 1) == doctest::Approx(0.0));
  CHECK(hb.stage_u(-2, 0)[0] == doctest::Approx(ex.exact.u(-0.5)[0]));
  CHECK(hb.grid_v(-4)[1] == doctest::Approx(ex.exact.v(-1.0)[1]));
  CHECK_THROWS_AS(hb.stage_u(0, 0), HistoryError);
  CHECK_THROWS_AS(hb.grid_u(0), HistoryError);
  CHECK_THROWS_AS(hb.stage_u(-5, 0), HistoryError);

  StageArrays s(2, 2, 2);
  CHECK_THROWS_AS(hb.push_stage(1, s), HistoryError);
  hb.push_stage(0, s);
  CHECK(hb.stage_u(0, 1)[0] == 0.0);
  CHECK_THROWS_AS(hb.push_stage(1, StageArrays(1, 2, 2)), HistoryError);
  hb.push_grid(0, Vector{1, 1}, Vector{2, 2});
  hb.push_grid(1, Vector{1, 1}, Vector{2, 2});
  // Ring of m + 1 = 5 grid records: -4 was evicted by 1.
  CHECK_THROWS_AS(hb.grid_u(-4), HistoryError);
  CHECK(hb.grid_v(-3)[0] == doctest::Approx(ex.exact.v(-0.75)[0]));
}

TEST_CASE("config validation") {
  const auto ex = build_example2();
  SolverConfig cfg = default_config(ex, 10, 1.0);
  CHECK_NOTHROW(cfg.validate(ex.problem));
  SolverConfig bad = cfg;
  bad.beta_rule = compound_simpson(20, 1.0);
  CHECK_THROWS_AS(bad.validate(ex.problem), std::invalid_argument);
  bad = make_config(lobatto_iiic_2(), 10, 2.0, 1.0);
  CHECK_THROWS_AS(bad.validate(ex.problem), std::invalid_argument);
  bad = cfg;
  bad.t_end = 0.0;
  CHECK_THROWS_AS(integrate(ex.problem, bad), std::invalid_argument);
  bad = cfg;
  bad.newton_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(ex.problem), std::invalid_argument);
}

TEST_CASE("divergence is a result, bad dimensions are an error") {
  const auto ex = build_example1(10);
  const Trajectory rk = integrate(ex.problem, make_config(classical_rk4(), 100, ex.problem.tau, 5 * std::numbers::pi / 2));
  CHECK(rk.diverged);
  REQUIRE(rk.divergence_step);
  CHECK(*rk.divergence_step < 500);
  CHECK(rk.divergence_reason.find("blow-up") != std::string::npos);

  DidaeProblem nan = scalar_ode(-1.0);
  nan.f = [](double t, std::span<const double> u, std::span<const double>) {
    return Vector{t > 0.45 ? std::numeric_limits<double>::quiet_NaN() : -u[0]};
  };
  const Trajectory tn = integrate(nan, make_config(lobatto_iiic_2(), 10, 1.0, 2.0));
  CHECK(tn.diverged);
  CHECK(tn.divergence_reason.find("non-finite") != std::string::npos);
  CHECK(tn.times.back() < 0.5);

  DidaeProblem wrong = scalar_ode(-1.0);
  wrong.g = [](double, std::span<const double>, std::span<const double>) { return Vector{0.0, 0.0}; };
  CHECK_THROWS_AS(integrate(wrong, make_config(lobatto_iiic_2(), 10, 1.0, 2.0)), EvaluationError);
}

TEST_CASE("integration is deterministic and indexable") {
  const auto ex = build_example2();
  const auto cfg = default_config(ex, 10, 3.0);
  const Trajectory a = integrate(ex.problem, cfg);
  const Trajectory b = integrate(ex.problem, cfg);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
  CHECK(a.size() == 31);
  CHECK(a.newton_iterations[0] == 0);
  CHECK(a.index_of(1.5) == std::optional<std::size_t>(15));
  CHECK_FALSE(a.index_of(1.55).has_value());
  CHECK_FALSE(a.index_of(3.1).has_value());
}

TEST_CASE("initial data override") {
  const auto ex = build_example2();
  const auto cfg = default_config(ex, 10, 1.0);
  InitialData shifted{[&](double t) {
                        Vector u = ex.problem.psi(t);
                        u[0] += 1.0;
                        return u;
                      },
                      ex.problem.phi};
  const Trajectory tr = integrate(ex.problem, cfg, shifted);
  CHECK(tr.u[0][0] == doctest::Approx(2.0));
}
