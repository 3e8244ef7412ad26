// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <unistd.h>

#include "cqrk/cli.hpp"
#include "cqrk/experiments.hpp"
#include "cqrk/quadrature.hpp"
#include "cqrk/stability_criteria.hpp"
#include "cqrk/tableau.hpp"

using namespace cqrk;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "[x] ") + what);
  }
};

bool within_factor(double got, double ref, double factor) {
  return std::isfinite(got) && got > 0.0 && got <= factor * ref && got >= ref / factor;
}

std::string g(double x) { return fmt::format("{:.4e}", x); }

Outcome algebraic_certificates() {
  Outcome o;
  const auto lob = lobatto_iiic_2();
  const auto v1 = is_algebraically_stable(lob, 1.0, 0.0, lob.b());
  o.expect(v1.psd && v1.min_eigenvalue >= -1e-10, "lobatto min eig " + g(v1.min_eigenvalue) + " >= -1e-10");
  const auto rk = classical_rk4();
  const auto v2 = is_algebraically_stable(rk, 1.0, 0.0, rk.b());
  o.expect(!v2.psd && v2.min_eigenvalue < -1e-6, "rk4 min eig " + g(v2.min_eigenvalue) + " < -1e-6");
  const auto pre = asymptotic_prerequisites(lob);
  o.expect(std::abs(pre.det_a - 0.5) <= 1e-14, "det A " + fmt::format("{:.17g}", pre.det_a));
  o.expect(std::abs(pre.growth) <= 1e-14, "growth " + g(pre.growth));
  return o;
}

Outcome quadrature_properties() {
  Outcome o;
  const double tau = kPi / 2;
  double worst = 0.0;
  for (int m = 2; m <= 200; m += 2) {
    const QuadratureRule rule = compound_simpson(m, tau);
    for (int deg = 0; deg <= 3; ++deg) {
      std::vector<double> samples;
      for (int q = 0; q <= m; ++q) samples.push_back(std::pow(q * tau / m, deg));
      const double exact = std::pow(tau, deg + 1) / (deg + 1);
      worst = std::max(worst, std::abs(cqrk::apply(rule, samples) - exact));
    }
  }
  o.expect(worst <= 1e-12 * tau, "cubic exactness worst error " + g(worst));
  double mu_max = 0.0;
  for (int m = 4; m <= 200; m += 2) mu_max = std::max(mu_max, mu_bound(compound_simpson(m, tau)));
  o.expect(mu_max < 2.5, "max mu_bound over m in [4,200] = " + g(mu_max));
  const double mu4 = mu_bound(compound_simpson(4, tau));
  o.expect(std::abs(mu4 - 1.8045) <= 1e-3, "mu_bound(m=4) = " + fmt::format("{:.6f}", mu4));
  return o;
}

// Direct arithmetic, independent of the library formulas.
double bracket(const ProblemConstants& pc, double mu) {
  const auto& L = pc.lipschitz;
  const double m2 = mu * mu;
  const double tail = 2 * m2 * L[0] * L[4] * L[4] * (2 * L[1] * L[1] + 4 * m2 * L[2] * L[2] * L[5] * L[5]);
  return 2 * pc.alpha + L[0] + 2 * m2 * L[0] * L[3] * L[3] + tail / (1 - 4 * m2 * L[2] * L[2] * L[6] * L[6]);
}

double continuous_main(const ProblemConstants& pc) {
  const auto& L = pc.lipschitz;
  const double t = pc.tau;
  return pc.alpha + L[0] * L[3] * t + L[0] * L[4] * t * (L[1] + L[2] * L[5] * t) / (1 - L[2] * L[6] * t);
}

Outcome criterion_arithmetic() {
  Outcome o;
  const double gamma = 4.0 / 3.0;
  const auto c1 = build_example({ExampleId::ex1, 10}).constants;
  const auto& L1 = c1.lipschitz;
  const double b1 = bracket(c1, 2.5);
  o.expect(L1[2] * L1[6] * c1.tau < 1 && continuous_main(c1) < 0, "ex1 continuous main " + g(continuous_main(c1)));
  o.expect(4 * 6.25 * L1[2] * L1[2] * L1[6] * L1[6] < 1 && 2 * gamma * c1.tau * L1[2] * L1[6] < 1 && b1 < 0,
           "ex1 discrete conditions, bracket " + g(b1));
  o.expect(std::abs(b1 + 10.89) <= 0.05, "ex1 bracket within 0.05 of -10.89");
  const MethodConstants mc1{2.5, gamma, 1.0, 0.0, kPi / 20};
  const auto lib_c = continuous_stability_check(c1);
  const auto lib_g = global_stability_check(c1, mc1);
  const auto lib_a = asymptotic_stability_check(c1, mc1);
  o.expect(lib_c.satisfied && lib_g.satisfied && lib_a.satisfied, "ex1 library checks all satisfied");
  o.expect(std::abs(*lib_a.lhs("bracket") - b1) <= 1e-12 * std::abs(b1), "ex1 library bracket matches");

  const auto c2 = build_example({ExampleId::ex2}).constants;
  const double b2 = bracket(c2, 2.5);
  o.expect(b2 > 0 && std::abs(b2 - 470) <= 5, "ex2 mu = 2.5 bracket " + g(b2));
  const MethodConstants loose{2.5, gamma, 1.0, 0.0, 0.1};
  o.expect(!asymptotic_stability_check(c2, loose).satisfied, "ex2 mu = 2.5 rejected by library");
  const double mu = mu_bound(compound_simpson(4, c2.tau));
  const double b3 = bracket(c2, mu);
  o.expect(std::abs(mu - 1.149) <= 1e-3, "ex2 computed mu " + fmt::format("{:.5f}", mu));
  o.expect(b3 < 0 && std::abs(b3 + 72) <= 2, "ex2 computed-mu bracket " + g(b3));
  const MethodConstants tight{mu, gamma, 1.0, 0.0, 0.1};
  o.expect(asymptotic_stability_check(c2, tight).satisfied && global_stability_check(c2, tight).satisfied,
           "ex2 computed mu accepted by library");
  return o;
}

Outcome table1_reproduction() {
  Outcome o;
  const auto t = table1({10, 100});
  const auto& c10 = t.columns[0];
  const auto& c100 = t.columns[1];
  o.expect(within_factor(c10.e[0], 4.9525e-3, 10), "m=10 E(pi/2) = " + g(c10.e[0]) + " vs 4.9525e-03 (x10)");
  o.expect(within_factor(c10.ea[0], 6.0145e-2, 10), "m=10 EA(pi/2) = " + g(c10.ea[0]) + " vs 6.0145e-02 (x10)");
  o.expect(c100.e[2] <= 1e-12, "m=100 E(5pi/2) = " + g(c100.e[2]) + " <= 1e-12");
  o.expect(c100.ea[2] <= 1e-12, "m=100 EA(5pi/2) = " + g(c100.ea[2]) + " <= 1e-12");
  return o;
}

Outcome table2_reproduction() {
  Outcome o;
  const auto t = table2({0.1, 0.01});
  const auto& a = t.columns[0];
  const auto& b = t.columns[1];
  o.expect(within_factor(a.ea[0], 1.3382e-1, 10), "h=0.1 EA(0.5) = " + g(a.ea[0]) + " vs 1.3382e-01 (x10)");
  o.expect(within_factor(a.e[2], 4.0993e-11, 100), "h=0.1 E(5) = " + g(a.e[2]) + " vs 4.0993e-11 (x100)");
  o.expect(a.e[3] <= 1e-12, "h=0.1 E(10) = " + g(a.e[3]) + " <= 1e-12");
  o.expect(within_factor(b.e[1], 2.5050e-4, 100), "h=0.01 E(1) = " + g(b.e[1]) + " vs 2.5050e-04 (x100)");
  return o;
}

Outcome divergence_demonstration() {
  Outcome o;
  const auto rk = divergence_demo(100, "rk4");
  const double t_stop = rk.divergence_time.value_or(INFINITY);
  o.expect(rk.diverged && t_stop < 5 * kPi / 2, "rk4 diverged at t = " + g(t_stop));
  const double w = rk.w_norm.empty() ? 0.0 : rk.w_norm.back();
  o.expect(w > 1e3, "rk4 last w_norm = " + g(w) + " > 1e3");
  const auto lob = divergence_demo(100, "lobatto-iiic-2");
  o.expect(!lob.diverged, "lobatto not diverged");
  o.expect(lob.w_norm.back() <= 1e-10, "lobatto final w_norm = " + g(lob.w_norm.back()) + " <= 1e-10");
  return o;
}

Outcome convergence_order() {
  Outcome o;
  const auto r = convergence_study({ExampleId::ex2}, {10, 20, 40}, 2.0);
  for (std::size_t i = 0; i < r.u_order.size(); ++i)
    o.expect(r.u_order[i] >= 1.8, fmt::format("order m={}->{} = {:.3f} >= 1.8", r.m[i], r.m[i + 1], r.u_order[i]));
  return o;
}

Outcome stability_witnesses() {
  Outcome o;
  for (const ExampleSpec spec : {ExampleSpec{ExampleId::ex1, 10}, ExampleSpec{ExampleId::ex2}}) {
    const auto ex = build_example(spec);
    const auto pert = standard_perturbation(spec);
    const double window = initial_window_max(ex.problem, pert, ex.norm);
    const double t_end = spec.id == ExampleId::ex1 ? 5 * kPi / 2 : 10.0;
    for (int m : {10, 100}) {
      const auto run = perturbation_run(spec, pert, default_config(ex, m, t_end));
      const auto w = stability_witness(run.errors, window, 10.0, 1e-10);
      const std::string tag = fmt::format("{} m={}", example_name(spec.id), m);
      o.expect(w.bounded, tag + " max " + g(w.series_max) + " <= 10 x " + g(window));
      o.expect(w.decayed, tag + " final " + g(std::max(w.final_w, w.final_r)) + " <= 1e-10");
    }
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

Outcome deterministic_replay() {
  Outcome o;
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / ("cqrk-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(root);
  for (const std::string ex : {"ex1", "ex2"}) {
    std::ostringstream out, err;
    const int a = cli::run({"run", ex, "--m", "20", "--perturbed", "--out", (root / (ex + "-a")).string()}, out, err);
    const int b = cli::run({"rerun", (root / (ex + "-a") / "manifest.txt").string(), "--out",
                            (root / (ex + "-b")).string()},
                           out, err);
    const std::string ta = slurp(root / (ex + "-a") / "trajectory.csv");
    const std::string tb = slurp(root / (ex + "-b") / "trajectory.csv");
    o.expect(a == 0 && b == 0 && !ta.empty() && ta == tb,
             ex + " trajectory.csv identical (" + std::to_string(ta.size()) + " bytes)");
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"algebraic-stability certificates", algebraic_certificates},
      {"quadrature properties", quadrature_properties},
      {"criterion arithmetic", criterion_arithmetic},
      {"table 1 reproduction", table1_reproduction},
      {"table 2 reproduction", table2_reproduction},
      {"divergence demonstration", divergence_demonstration},
      {"convergence order", convergence_order},
      {"stability witnesses", stability_witnesses},
      {"deterministic replay", deterministic_replay},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string notes;
    for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << fmt::format(" ({:.2f} s): ", secs) << notes << "\n";
    failed += o.pass ? 0 : 1;
  }
  std::cout << (failed ? std::to_string(failed) + " of " : "all ") << criteria.size() << " criteria "
            << (failed ? "failed" : "passed") << "\n";
  return failed ? 1 : 0;
}
