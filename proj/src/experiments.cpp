#include "cqrk/experiments.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cqrk {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs fn(i) for i in [0, count), on separate threads when parallel.
template <class Fn>
auto run_all(std::size_t count, bool parallel, Fn fn) {
  using R = decltype(fn(std::size_t{0}));
  std::vector<R> out;
  out.reserve(count);
  if (!parallel || count < 2) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(fn(i));
    return out;
  }
  std::vector<std::future<R>> futures;
  for (std::size_t i = 0; i < count; ++i) futures.push_back(std::async(std::launch::async, fn, i));
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

Vector add(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

Vector sub(Vector a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

int steps_for(double tau, double h) {
  const long m = std::lround(tau / h);
  if (m < 1 || std::abs(m * h - tau) > 1e-9 * tau)
    throw std::invalid_argument("h = " + std::to_string(h) + " does not divide the delay");
  return static_cast<int>(m);
}

TableColumn column_at(const ErrorSeries& errors, int m, double h, const std::vector<double>& times) {
  TableColumn col;
  col.m = m;
  col.h = h;
  col.times = times;
  col.diverged = errors.diverged;
  for (double t : times) {
    const auto idx = errors.index_of(t);
    col.e.push_back(idx ? errors.e_inf[*idx] : kNaN);
    col.ea.push_back(idx ? errors.ea_inf[*idx] : kNaN);
  }
  return col;
}

}  // namespace

ExampleProblem build_example(const ExampleSpec& spec) {
  return spec.id == ExampleId::ex1 ? build_example1(spec.n_s, spec.forcing) : build_example2();
}

std::string example_name(ExampleId id) { return id == ExampleId::ex1 ? "ex1" : "ex2"; }

std::optional<ExampleId> parse_example(const std::string& text) {
  if (text == "ex1" || text == "1") return ExampleId::ex1;
  if (text == "ex2" || text == "2") return ExampleId::ex2;
  return std::nullopt;
}

PerturbationSpec standard_perturbation(const ExampleSpec& spec) {
  if (spec.id == ExampleId::ex1) {
    const std::size_t n = static_cast<std::size_t>(spec.n_s) - 1;
    auto half = [n](double) { return Vector(n, 0.5); };
    return {half, half};
  }
  return {[](double t) { return Vector{0.5 * std::cos(t), 0.5 * std::sin(t)}; },
          [](double) { return Vector{0.5, 0.5}; }};
}

PerturbationSpec zero_perturbation(const DidaeProblem& problem) {
  const std::size_t n1 = problem.n1, n2 = problem.n2;
  return {[n1](double) { return Vector(n1, 0.0); }, [n2](double) { return Vector(n2, 0.0); }};
}

InitialData perturbed_initial(const DidaeProblem& problem, const PerturbationSpec& pert) {
  if (!pert.delta_psi || !pert.delta_phi) throw std::invalid_argument("perturbation maps must be set");
  return {[psi = problem.psi, d = pert.delta_psi](double t) { return add(psi(t), d(t)); },
          [phi = problem.phi, d = pert.delta_phi](double t) { return add(phi(t), d(t)); }};
}

double initial_window_max(const DidaeProblem& problem, const PerturbationSpec& pert, const Norm& norm,
                          int samples) {
  if (samples < 1) throw std::invalid_argument("initial_window_max: samples must be >= 1");
  double out = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const double theta = problem.t0 - problem.tau + problem.tau * k / samples;
    out = std::max({out, norm(pert.delta_psi(theta)), norm(pert.delta_phi(theta))});
  }
  return out;
}

std::optional<std::size_t> ErrorSeries::index_of(double t) const {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
  return std::nullopt;
}

ErrorSeries error_series(const Trajectory& nominal, const Trajectory& perturbed, const Norm& norm) {
  const Norm inf{NormKind::inf, 1.0};
  const ExactErrorSeries weighted = compare_trajectories(nominal, perturbed, norm);
  const ExactErrorSeries maxnorm = compare_trajectories(nominal, perturbed, inf);
  ErrorSeries out;
  out.times = weighted.times;
  out.w_norm = weighted.u_error;
  out.r_norm = weighted.v_error;
  out.e_inf = maxnorm.u_error;
  out.ea_inf = maxnorm.v_error;
  out.norm = norm;
  out.diverged = nominal.diverged || perturbed.diverged;
  if (out.diverged && !out.times.empty()) out.divergence_time = out.times.back();
  return out;
}

SolverConfig default_config(const ExampleProblem& ex, int m, double t_end, const std::string& rule) {
  return make_config(lobatto_iiic_2(), m, ex.problem.tau, t_end, rule);
}

PerturbationRun perturbation_run(const ExampleSpec& spec, const PerturbationSpec& pert, const SolverConfig& config,
                                 bool parallel) {
  const ExampleProblem ex = build_example(spec);
  const InitialData tilde = perturbed_initial(ex.problem, pert);
  auto runs = run_all(2, parallel, [&](std::size_t i) {
    return i == 0 ? integrate(ex.problem, config) : integrate(ex.problem, config, tilde);
  });
  PerturbationRun out{std::move(runs[0]), std::move(runs[1]), {}};
  out.errors = error_series(out.nominal, out.perturbed, ex.norm);
  return out;
}

TableResult table1(const std::vector<int>& m_values, bool parallel) {
  const ExampleSpec spec{ExampleId::ex1, 10};
  const ExampleProblem ex = build_example(spec);
  const double pi = std::numbers::pi;
  const std::vector<double> times{pi / 2, 3 * pi / 2, 5 * pi / 2};
  TableResult out{"ex1", {}};
  out.columns = run_all(m_values.size(), parallel, [&](std::size_t i) {
    const int m = m_values[i];
    const SolverConfig cfg = default_config(ex, m, times.back());
    const PerturbationRun run = perturbation_run(spec, standard_perturbation(spec), cfg, false);
    return column_at(run.errors, m, cfg.h(), times);
  });
  return out;
}

TableResult table2(const std::vector<double>& h_values, bool parallel) {
  const ExampleSpec spec{ExampleId::ex2};
  const ExampleProblem ex = build_example(spec);
  const std::vector<double> times{0.5, 1.0, 5.0, 10.0};
  TableResult out{"ex2", {}};
  out.columns = run_all(h_values.size(), parallel, [&](std::size_t i) {
    const int m = steps_for(ex.problem.tau, h_values[i]);
    const SolverConfig cfg = default_config(ex, m, times.back());
    const PerturbationRun run = perturbation_run(spec, standard_perturbation(spec), cfg, false);
    return column_at(run.errors, m, cfg.h(), times);
  });
  return out;
}

TableResult reference_table1() {
  const double pi = std::numbers::pi;
  const std::vector<double> times{pi / 2, 3 * pi / 2, 5 * pi / 2};
  return {"ex1",
          {{10, pi / 20, times, {4.9525e-03, 7.5835e-05, 1.3489e-06}, {6.0145e-02, 2.1954e-05, 1.5814e-05}, false},
           {100, pi / 200, times, {6.6841e-06, 5.4973e-15, 3.4694e-18}, {1.5299e-06, 1.5693e-13, 6.7221e-17},
            false}}};
}

TableResult reference_table2() {
  const std::vector<double> times{0.5, 1.0, 5.0, 10.0};
  return {"ex2",
          {{10, 0.1, times, {6.7956e-04, 3.2452e-04, 4.0993e-11, 9.1818e-19},
            {1.3382e-01, 4.6812e-02, 5.7840e-07, 5.1553e-13}, false},
           {100, 0.01, times, {6.5345e-04, 2.5050e-04, 4.3440e-11, 9.3851e-19},
            {1.1259e-01, 2.5012e-02, 4.2201e-07, 3.9258e-13}, false}}};
}

ErrorSeries divergence_demo(int m, const std::string& tableau, double t_end) {
  const ExampleSpec spec{ExampleId::ex1, 10};
  const ExampleProblem ex = build_example(spec);
  const auto tab = builtin_tableau(tableau);
  if (!tab) throw std::invalid_argument("unknown tableau '" + tableau + "'");
  if (t_end <= 0.0) t_end = 5.0 * std::numbers::pi / 2.0;
  const SolverConfig cfg = make_config(*tab, m, ex.problem.tau, t_end);
  return perturbation_run(spec, standard_perturbation(spec), cfg).errors;
}

ConvergenceResult convergence_study(const ExampleSpec& spec, const std::vector<int>& m_list,
                                    std::optional<double> t_eval, bool parallel) {
  if (m_list.size() < 3) throw std::invalid_argument("convergence_study: need at least 3 step counts");
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (m_list[i] <= m_list[i - 1]) throw std::invalid_argument("convergence_study: m list must be increasing");

  const ExampleProblem ex = build_example(spec);
  ConvergenceResult out;
  out.t_eval = t_eval.value_or(spec.id == ExampleId::ex2 ? 2.0 : std::numbers::pi / 2.0);

  struct Point {
    double h, eu, ev;
  };
  const auto points = run_all(m_list.size(), parallel, [&](std::size_t i) {
    const SolverConfig cfg = default_config(ex, m_list[i], out.t_eval);
    const Trajectory traj = integrate(ex.problem, cfg);
    const auto idx = traj.index_of(out.t_eval);
    if (traj.diverged || !idx)
      throw std::runtime_error("convergence_study: m = " + std::to_string(m_list[i]) + " did not reach t_eval");
    const Vector du = sub(traj.u[*idx], ex.exact.u(out.t_eval));
    const Vector dv = sub(traj.v[*idx], ex.exact.v(out.t_eval));
    return Point{cfg.h(), ex.norm(du), ex.norm(dv)};
  });

  for (std::size_t i = 0; i < points.size(); ++i) {
    out.m.push_back(m_list[i]);
    out.h.push_back(points[i].h);
    out.u_error.push_back(points[i].eu);
    out.v_error.push_back(points[i].ev);
  }
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double ratio = std::log2(out.h[i] / out.h[i + 1]);
    out.u_order.push_back(std::log2(out.u_error[i] / out.u_error[i + 1]) / ratio);
    out.v_order.push_back(std::log2(out.v_error[i] / out.v_error[i + 1]) / ratio);
  }
  return out;
}

StabilityWitness stability_witness(const ErrorSeries& errors, double window_max, double factor, double final_tol) {
  StabilityWitness w;
  w.window_max = window_max;
  for (std::size_t i = 0; i < errors.size(); ++i)
    w.series_max = std::max({w.series_max, errors.w_norm[i], errors.r_norm[i]});
  if (!errors.w_norm.empty()) {
    w.final_w = errors.w_norm.back();
    w.final_r = errors.r_norm.back();
  }
  w.bounded = !errors.diverged && std::isfinite(w.series_max) && w.series_max <= factor * window_max;
  w.decayed = !errors.diverged && w.final_w <= final_tol && w.final_r <= final_tol;
  return w;
}

}  // namespace cqrk
