#include "cqrk/cli.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "cqrk/experiments.hpp"
#include "cqrk/stability_criteria.hpp"
#include "cqrk/tableau.hpp"

namespace cqrk::cli {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string sci(double x) { return fmt::format("{:.16e}", x); }

void print(std::ostream& os, const std::string& s) { os << s; }

std::ofstream open_output(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  return f;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

void finish(std::ofstream& f, const fs::path& path) {
  f.flush();
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

ButcherTableau resolve_tableau(const std::string& spec) {
  if (auto tab = builtin_tableau(spec)) return *tab;
  std::ifstream in(spec);
  if (!in) throw UsageError("unknown tableau '" + spec + "' (not a built-in name or readable file)");
  try {
    return parse_tableau(in, spec);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("malformed tableau file: ") + e.what());
  }
}

ExampleId resolve_example(const std::string& text) {
  const auto id = parse_example(text);
  if (!id) throw UsageError("unknown example '" + text + "' (expected ex1 or ex2)");
  return *id;
}

Example1Forcing resolve_forcing(const std::string& text) {
  if (text == "consistent") return Example1Forcing::consistent;
  if (text == "as-printed") return Example1Forcing::as_printed;
  throw UsageError("unknown forcing '" + text + "' (expected consistent or as-printed)");
}

std::string forcing_name(Example1Forcing f) { return f == Example1Forcing::consistent ? "consistent" : "as-printed"; }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad list entry '" + item + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// check-tableau

struct TableauOptions {
  std::string tableau;
  double k = 1.0;
  double l = 0.0;
  std::string d;
  bool record = false;
};

int cmd_check_tableau(const TableauOptions& o, std::ostream& out) {
  const ButcherTableau tab = resolve_tableau(o.tableau);
  std::optional<Vector> d;
  if (!o.d.empty()) {
    d = parse_list(o.d);
    if (d->size() != tab.stages()) throw UsageError("--d needs " + std::to_string(tab.stages()) + " entries");
  }
  StabilityVerdict verdict;
  try {
    verdict = is_algebraically_stable(tab, o.k, o.l, d);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  std::optional<AsymptoticPrerequisites> pre;
  try {
    pre = asymptotic_prerequisites(tab);
  } catch (const SingularTableauError&) {
  }
  const bool growth_ok = pre && pre->growth < 1.0 - kBoundaryTolerance;

  if (o.record) {
    out << "tableau = " << tab.name() << "\n";
    out << "stages = " << tab.stages() << "\n";
    out << "k = " << sci(o.k) << "\nl = " << sci(o.l) << "\n";
    out << "algebraically_stable = " << (verdict.psd ? "true" : "false") << "\n";
    out << "min_eigenvalue = " << sci(verdict.min_eigenvalue) << "\n";
    out << "det_a = " << (pre ? sci(pre->det_a) : sci(0.0)) << "\n";
    out << "singular = " << (pre ? "false" : "true") << "\n";
    if (pre) out << "growth = " << sci(pre->growth) << "\n";
    out << "growth_below_one = " << (growth_ok ? "true" : "false") << "\n";
    return kOk;
  }

  std::string dtext;
  for (std::size_t i = 0; i < verdict.d_used.size(); ++i) dtext += (i ? ", " : "") + fmt::format("{:.6g}", verdict.d_used[i]);
  print(out, fmt::format("tableau {} (s = {}{}{})\n", tab.name(), tab.stages(), tab.is_explicit() ? ", explicit" : "",
                         tab.is_stiffly_accurate() ? ", stiffly accurate" : ""));
  print(out, fmt::format("(k, l) = ({:g}, {:g}), D = diag({})\n", o.k, o.l, dtext));
  print(out, fmt::format("min eigenvalue of M = {:.6e}\n", verdict.min_eigenvalue));
  if (pre) {
    print(out, fmt::format("det A = {:.6g}\n", pre->det_a));
    print(out, fmt::format("algebraically stable: {}; growth |1-b'A^{{-1}}e| = {:.6g}{}\n", verdict.psd ? "yes" : "no",
                           pre->growth, growth_ok ? "" : " (fails strict bound)"));
  } else {
    print(out, "det A = 0 (singular, asymptotic prerequisites do not apply)\n");
    print(out, fmt::format("algebraically stable: {}\n", verdict.psd ? "yes" : "no"));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// check-conditions

struct ConditionOptions {
  std::optional<std::string> example;
  int n_s = 10;
  std::optional<double> alpha, tau;
  std::array<std::optional<double>, 7> L;
  std::string mu = "auto";
  std::string gamma = "auto";
  int m = 4;
  std::string rule = "simpson";
  std::optional<double> h;
  double l = 0.0;
  double k = 1.0;
  bool record = false;
};

std::optional<double> auto_or_value(const std::string& text, const char* flag) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + " must be 'auto' or a number, got '" + text + "'");
  }
}

void print_report(std::ostream& out, const CriterionReport& r, bool record) {
  if (record) {
    out << r.name << ".satisfied = " << (r.satisfied ? "true" : "false") << "\n";
    for (const auto& [key, value] : r.lhs_values) {
      out << r.name << "." << key << " = " << sci(value) << "\n";
      if (const auto mg = r.margin(key)) out << r.name << "." << key << ".margin = " << sci(*mg) << "\n";
    }
    return;
  }
  print(out, fmt::format("{}: {}\n", r.name, r.satisfied ? "satisfied" : "NOT satisfied"));
  for (const auto& [key, value] : r.lhs_values) {
    const auto mg = r.margin(key);
    print(out, fmt::format("  {:<18} = {:>14.6e}{}\n", key, value,
                           mg ? fmt::format("   margin {:>13.6e}", *mg) : std::string()));
  }
}

void print_reports(std::ostream& out, const ProblemConstants& pc, const MethodConstants& mc, bool record,
                   const std::string& prefix) {
  if (record) {
    out << prefix << "mu = " << sci(mc.mu) << "\n" << prefix << "gamma = " << sci(mc.gamma_max) << "\n";
    out << prefix << "h = " << sci(mc.h) << "\n";
  } else {
    print(out, fmt::format("mu = {:.6g}, gamma = {:.6g}, h = {:.6g}, (k, l) = ({:g}, {:g})\n", mc.mu, mc.gamma_max,
                           mc.h, mc.k, mc.l));
  }
  for (CriterionReport r : {continuous_stability_check(pc), global_stability_check(pc, mc),
                            asymptotic_stability_check(pc, mc)}) {
    if (record) r.name = prefix + r.name;
    print_report(out, r, record);
  }
}

int cmd_check_conditions(const ConditionOptions& o, std::ostream& out) {
  ProblemConstants pc;
  std::vector<std::string> missing;
  if (o.example) {
    const ExampleSpec spec{resolve_example(*o.example), o.n_s};
    pc = build_example(spec).constants;
  }
  auto take = [&](const std::optional<double>& v, double& slot, const std::string& name) {
    if (v)
      slot = *v;
    else if (!o.example)
      missing.push_back(name);
  };
  take(o.alpha, pc.alpha, "--alpha");
  for (int i = 0; i < 7; ++i) take(o.L[static_cast<std::size_t>(i)], pc.lipschitz[static_cast<std::size_t>(i)], "--L" + std::to_string(i + 1));
  take(o.tau, pc.tau, "--tau");
  if (!missing.empty()) {
    std::string list;
    for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
    throw UsageError("missing constants: " + list + " (or use --example ex1|ex2)");
  }
  try {
    pc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  QuadratureRule rule = [&] {
    try {
      return make_rule(o.rule, o.m, pc.tau);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  const auto mu_value = auto_or_value(o.mu, "--mu");
  const auto gamma_value = auto_or_value(o.gamma, "--gamma");
  MethodConstants mc{.mu = mu_value.value_or(mu_bound(rule)),
                     .gamma_max = gamma_value.value_or(max_weight(rule)),
                     .k = o.k,
                     .l = o.l,
                     .h = o.h.value_or(rule.h())};
  try {
    mc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  if (o.record) {
    out << "alpha = " << sci(pc.alpha) << "\n";
    for (int i = 1; i <= 7; ++i) out << "L" << i << " = " << sci(pc.L(i)) << "\n";
    out << "tau = " << sci(pc.tau) << "\n";
    out << "rule = " << o.rule << "\nm = " << o.m << "\n";
  } else {
    std::string ls;
    for (int i = 1; i <= 7; ++i) ls += fmt::format("{}L{} = {:g}", i > 1 ? ", " : "", i, pc.L(i));
    print(out, fmt::format("alpha = {:.6g}, tau = {:.6g}\n{}\n", pc.alpha, pc.tau, ls));
    if (!mu_value) print(out, fmt::format("mu from {} rule with m = {}\n", o.rule, o.m));
  }
  print_reports(out, pc, mc, o.record, "");

  if (!mu_value) {
    MethodConstants ref = mc;
    ref.mu = 2.5;
    ref.gamma_max = gamma_value.value_or(4.0 / 3.0);
    if (!o.record) print(out, "\nreference values mu = 5/2, gamma = 4/3:\n");
    print_reports(out, pc, ref, o.record, "reference.");
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// run / rerun

struct RunOptions {
  std::string example = "ex1";
  int m = 10;
  std::string tableau = "lobatto-iiic-2";
  std::string rule = "simpson";
  std::optional<double> t_end;
  bool perturbed = false;
  std::string out_dir = "cqrk-out";
  int n_s = 10;
  std::string forcing = "consistent";
};

void write_trajectory(const fs::path& path, const Trajectory& traj) {
  auto f = open_output(path);
  f << "t";
  const std::size_t n1 = traj.u.empty() ? 0 : traj.u[0].size();
  const std::size_t n2 = traj.v.empty() ? 0 : traj.v[0].size();
  for (std::size_t i = 1; i <= n1; ++i) f << ",u_" << i;
  for (std::size_t i = 1; i <= n2; ++i) f << ",v_" << i;
  f << "\n";
  for (std::size_t n = 0; n < traj.size(); ++n) {
    f << sci(traj.times[n]);
    for (double x : traj.u[n]) f << "," << sci(x);
    for (double x : traj.v[n]) f << "," << sci(x);
    f << "\n";
  }
  finish(f, path);
}

void write_errors(const fs::path& path, const ErrorSeries& e) {
  auto f = open_output(path);
  f << "t,w_norm,r_norm,e_inf,ea_inf\n";
  for (std::size_t n = 0; n < e.size(); ++n)
    f << sci(e.times[n]) << "," << sci(e.w_norm[n]) << "," << sci(e.r_norm[n]) << "," << sci(e.e_inf[n]) << ","
      << sci(e.ea_inf[n]) << "\n";
  finish(f, path);
}

using Manifest = std::vector<std::pair<std::string, std::string>>;

void write_manifest(const fs::path& path, const Manifest& manifest) {
  auto f = open_output(path);
  for (const auto& [k, v] : manifest) f << k << " = " << v << "\n";
  finish(f, path);
}

std::map<std::string, std::string> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read manifest '" + path.string() + "'");
  std::map<std::string, std::string> out;
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

int cmd_run(const RunOptions& o, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ExampleSpec spec{resolve_example(o.example), o.n_s, resolve_forcing(o.forcing)};
  if (spec.id == ExampleId::ex1 && o.n_s < 2) throw UsageError("--ns must be >= 2");
  const ExampleProblem ex = build_example(spec);
  const double t_end = o.t_end.value_or(spec.id == ExampleId::ex1 ? 5.0 * std::numbers::pi / 2.0 : 10.0);
  const SolverConfig cfg = [&] {
    try {
      SolverConfig c = make_config(resolve_tableau(o.tableau), o.m, ex.problem.tau, t_end, o.rule);
      c.validate(ex.problem);
      return c;
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();

  const fs::path dir(o.out_dir);
  ensure_dir(dir);

  Trajectory nominal;
  std::optional<ErrorSeries> errors;
  std::vector<std::string> reasons;
  if (o.perturbed) {
    PerturbationRun run = perturbation_run(spec, standard_perturbation(spec), cfg);
    nominal = std::move(run.nominal);
    errors = std::move(run.errors);
    if (run.perturbed.diverged) reasons.push_back("perturbed: " + run.perturbed.divergence_reason);
  } else {
    nominal = integrate(ex.problem, cfg);
  }
  const bool diverged = errors ? errors->diverged : nominal.diverged;

  write_trajectory(dir / "trajectory.csv", nominal);
  if (errors) write_errors(dir / "errors.csv", *errors);

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Manifest manifest{{"command", "run"},
                    {"example", example_name(spec.id)},
                    {"ns", std::to_string(o.n_s)},
                    {"forcing", forcing_name(spec.forcing)},
                    {"m", std::to_string(o.m)},
                    {"h", sci(cfg.h())},
                    {"tableau", o.tableau},
                    {"rule", o.rule},
                    {"t_end", sci(t_end)},
                    {"perturbed", o.perturbed ? "true" : "false"},
                    {"out", o.out_dir},
                    {"trajectory_csv", "trajectory.csv"},
                    {"errors_csv", errors ? "errors.csv" : ""},
                    {"steps", std::to_string(nominal.size() - 1)},
                    {"diverged", diverged ? "true" : "false"},
                    {"divergence_time", errors && errors->divergence_time ? sci(*errors->divergence_time)
                                        : nominal.diverged ? sci(nominal.times.back())
                                                           : ""},
                    {"wall_seconds", fmt::format("{:.3f}", seconds)}};
  write_manifest(dir / "manifest.txt", manifest);

  print(out, fmt::format("{} m = {} h = {:.6g} tableau = {} rule = {}: {} steps to t = {:.6g}\n",
                         example_name(spec.id), o.m, cfg.h(), o.tableau, o.rule, nominal.size() - 1,
                         nominal.times.back()));
  print(out, fmt::format("diverged: {}\n", diverged ? "true" : "false"));
  if (nominal.diverged) reasons.insert(reasons.begin(), "nominal: " + nominal.divergence_reason);
  for (const auto& r : reasons) print(out, fmt::format("  {}\n", r));
  if (errors && errors->size() > 0) {
    print(out, fmt::format("final w_norm = {:.6e}, r_norm = {:.6e}, e_inf = {:.6e}, ea_inf = {:.6e}\n",
                           errors->w_norm.back(), errors->r_norm.back(), errors->e_inf.back(),
                           errors->ea_inf.back()));
  }
  print(out, fmt::format("wrote {}\n", dir.string()));
  return kOk;
}

int cmd_rerun(const std::string& manifest_path, const std::optional<std::string>& out_override, std::ostream& out) {
  const auto m = read_manifest(manifest_path);
  auto get = [&](const std::string& key) {
    const auto it = m.find(key);
    if (it == m.end()) throw UsageError("manifest lacks '" + key + "'");
    return it->second;
  };
  if (get("command") != "run") throw UsageError("rerun supports manifests written by 'run'");
  RunOptions o;
  try {
    o.example = get("example");
    o.n_s = std::stoi(get("ns"));
    o.forcing = get("forcing");
    o.m = std::stoi(get("m"));
    o.tableau = get("tableau");
    o.rule = get("rule");
    o.t_end = std::stod(get("t_end"));
    o.perturbed = get("perturbed") == "true";
    o.out_dir = out_override.value_or(get("out"));
  } catch (const std::logic_error& e) {
    throw UsageError(std::string("bad manifest value: ") + e.what());
  }
  return cmd_run(o, out);
}

// ---------------------------------------------------------------------------
// tables

std::string fmt_cell(double x) { return std::isnan(x) ? std::string("       --  ") : fmt::format("{:>11.4e}", x); }

void print_table1(std::ostream& out, const TableResult& res, const TableResult& ref) {
  print(out, "Example 1 (n_s = 10), Lobatto IIIC + compound Simpson\n");
  print(out, fmt::format("{:>8} |{:>12}{:>12}{:>12} |{:>12}{:>12}{:>12}\n", "m", "E(pi/2)", "E(3pi/2)", "E(5pi/2)",
                         "EA(pi/2)", "EA(3pi/2)", "EA(5pi/2)"));
  auto row = [&](const std::string& label, const TableColumn& c) {
    std::string line = fmt::format("{:>8} |", label);
    for (double x : c.e) line += " " + fmt_cell(x);
    line += " |";
    for (double x : c.ea) line += " " + fmt_cell(x);
    print(out, line + "\n");
  };
  for (const auto& c : res.columns) {
    row(std::to_string(c.m), c);
    for (const auto& r : ref.columns)
      if (r.m == c.m) row("ref", r);
  }
}

void print_table2(std::ostream& out, const TableResult& res, const TableResult& ref) {
  print(out, "Example 2, Lobatto IIIC + compound Simpson\n");
  print(out, fmt::format("{:>6} {:>8} |{:>12}{:>12}{:>12}{:>12}\n", "", "h", "t=0.5", "t=1", "t=5", "t=10"));
  for (int which = 0; which < 2; ++which) {
    for (const auto& c : res.columns) {
      auto row = [&](const std::string& label, const TableColumn& col) {
        std::string line = fmt::format("{:>6} {:>8} |", which == 0 ? "E" : "EA", label);
        for (double x : which == 0 ? col.e : col.ea) line += " " + fmt_cell(x);
        print(out, line + "\n");
      };
      row(fmt::format("{:g}", c.h), c);
      for (const auto& r : ref.columns)
        if (r.m == c.m) row("ref", r);
    }
  }
}

void write_table_csv(const fs::path& path, const TableResult& res, const TableResult& ref) {
  auto f = open_output(path);
  f << "example,m,h,t,e_inf,ea_inf,reference_e_inf,reference_ea_inf\n";
  for (const auto& c : res.columns) {
    const TableColumn* r = nullptr;
    for (const auto& rc : ref.columns)
      if (rc.m == c.m) r = &rc;
    for (std::size_t i = 0; i < c.times.size(); ++i) {
      f << res.example << "," << c.m << "," << sci(c.h) << "," << sci(c.times[i]) << "," << sci(c.e[i]) << ","
        << sci(c.ea[i]) << "," << (r ? sci(r->e[i]) : "") << "," << (r ? sci(r->ea[i]) : "") << "\n";
    }
  }
  finish(f, path);
}

int cmd_tables(const std::string& which, const std::optional<std::string>& out_dir, bool serial, std::ostream& out) {
  if (which != "1" && which != "2" && which != "all") throw UsageError("--which must be 1, 2 or all");
  std::optional<fs::path> dir;
  if (out_dir) {
    dir = *out_dir;
    ensure_dir(*dir);
  }
  bool diverged = false;
  if (which != "2") {
    const TableResult t1 = table1({10, 100}, !serial);
    print_table1(out, t1, reference_table1());
    if (dir) write_table_csv(*dir / "table1.csv", t1, reference_table1());
    for (const auto& c : t1.columns) diverged = diverged || c.diverged;
  }
  if (which == "all") print(out, "\n");
  if (which != "1") {
    const TableResult t2 = table2({0.1, 0.01}, !serial);
    print_table2(out, t2, reference_table2());
    if (dir) write_table_csv(*dir / "table2.csv", t2, reference_table2());
    for (const auto& c : t2.columns) diverged = diverged || c.diverged;
  }
  if (dir) write_manifest(*dir / "manifest.txt", {{"command", "tables"}, {"which", which}});
  if (diverged) {
    print(out, "a table run stopped early\n");
    return kFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// convergence

int cmd_convergence(const std::string& example, const std::string& m_list, std::optional<double> t_eval, int n_s,
                    const std::optional<std::string>& out_dir, bool serial, std::ostream& out) {
  const ExampleSpec spec{resolve_example(example), n_s};
  std::vector<int> ms;
  for (double x : parse_list(m_list)) {
    if (x != std::floor(x) || x < 1) throw UsageError("--m entries must be positive integers");
    ms.push_back(static_cast<int>(x));
  }
  ConvergenceResult res;
  try {
    res = convergence_study(spec, ms, t_eval, !serial);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  print(out, fmt::format("{} convergence at t = {:.6g} (Lobatto IIIC + compound Simpson)\n", example_name(spec.id),
                         res.t_eval));
  print(out, fmt::format("{:>6} {:>12} {:>12} {:>8} {:>12} {:>8}\n", "m", "h", "u error", "order", "v error", "order"));
  for (std::size_t i = 0; i < res.m.size(); ++i) {
    const std::string uo = i > 0 ? fmt::format("{:>8.3f}", res.u_order[i - 1]) : fmt::format("{:>8}", "");
    const std::string vo = i > 0 ? fmt::format("{:>8.3f}", res.v_order[i - 1]) : fmt::format("{:>8}", "");
    print(out, fmt::format("{:>6} {:>12.4e} {:>12.4e} {} {:>12.4e} {}\n", res.m[i], res.h[i], res.u_error[i], uo,
                           res.v_error[i], vo));
  }
  if (out_dir) {
    const fs::path dir(*out_dir);
    ensure_dir(dir);
    auto f = open_output(dir / "convergence.csv");
    f << "m,h,u_error,v_error,u_order,v_order\n";
    for (std::size_t i = 0; i < res.m.size(); ++i)
      f << res.m[i] << "," << sci(res.h[i]) << "," << sci(res.u_error[i]) << "," << sci(res.v_error[i]) << ","
        << (i > 0 ? sci(res.u_order[i - 1]) : "") << "," << (i > 0 ? sci(res.v_order[i - 1]) : "") << "\n";
    finish(f, dir / "convergence.csv");
    write_manifest(dir / "manifest.txt", {{"command", "convergence"},
                                          {"example", example_name(spec.id)},
                                          {"ns", std::to_string(n_s)},
                                          {"m", m_list},
                                          {"t_eval", sci(res.t_eval)}});
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// info

int cmd_info(std::ostream& out) {
  print(out, "tableaux:\n");
  for (const char* name : {"lobatto-iiic-2", "rk4", "implicit-midpoint", "backward-euler"}) {
    const ButcherTableau tab = *builtin_tableau(name);
    const bool stable = is_algebraically_stable(tab).psd;
    print(out, fmt::format("  {:<18} s = {}  algebraically stable: {}\n", name, tab.stages(), stable ? "yes" : "no"));
  }
  print(out, "quadrature rules: simpson (m even), trapezoid\n");
  print(out, "examples:\n");
  for (ExampleId id : {ExampleId::ex1, ExampleId::ex2}) {
    const ExampleProblem ex = build_example({id, 10});
    const auto& p = ex.problem;
    std::string ls;
    for (int i = 1; i <= 7; ++i) ls += fmt::format("{}{:g}", i > 1 ? ", " : "", ex.constants.L(i));
    print(out, fmt::format("  {}: n1 = {}, n2 = {}, tau = {:.6g}, t0 = {:g}, norm = {}\n", example_name(id), p.n1,
                           p.n2, p.tau, p.t0, ex.norm.describe()));
    print(out, fmt::format("       alpha = {:.6g}, L1..L7 = {}\n", ex.constants.alpha, ls));
  }
  print(out, "ex1 uses n_s = 10 here; pass --ns to other commands to change it.\n");
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"cqrk: implicit Runge-Kutta / compound quadrature solver for delay integro-differential-algebraic "
               "equations"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);

  TableauOptions tab_opts;
  auto* check_tab = app.add_subcommand("check-tableau", "algebraic stability and asymptotic prerequisites of a tableau");
  check_tab->add_option("tableau", tab_opts.tableau, "built-in name or tableau file")->required();
  check_tab->add_option("--k", tab_opts.k, "k of (k,l)-algebraic stability");
  check_tab->add_option("--l", tab_opts.l, "l of (k,l)-algebraic stability");
  check_tab->add_option("--d", tab_opts.d, "comma-separated diagonal of D (default b)");
  check_tab->add_flag("--record", tab_opts.record, "key = value output");

  ConditionOptions cond;
  auto* check_cond = app.add_subcommand("check-conditions", "evaluate the stability criteria for a constant set");
  check_cond->add_option("--example", cond.example, "preset constants of ex1 or ex2");
  check_cond->add_option("--ns", cond.n_s, "spatial intervals for example 1");
  check_cond->add_option("--alpha", cond.alpha, "one-sided Lipschitz constant");
  for (std::size_t i = 0; i < 7; ++i)
    check_cond->add_option("--L" + std::to_string(i + 1), cond.L[i], "Lipschitz constant L" + std::to_string(i + 1));
  check_cond->add_option("--tau", cond.tau, "delay");
  check_cond->add_option("--mu", cond.mu, "quadrature bound: auto or a value");
  check_cond->add_option("--gamma", cond.gamma, "max |gamma_q|: auto or a value");
  check_cond->add_option("--m", cond.m, "subintervals per delay for auto values and the default h");
  check_cond->add_option("--rule", cond.rule, "simpson or trapezoid");
  check_cond->add_option("--h", cond.h, "step size (default tau/m)");
  check_cond->add_option("--l", cond.l, "l of (k,l)-algebraic stability");
  check_cond->add_option("--k", cond.k, "k of (k,l)-algebraic stability");
  check_cond->add_flag("--record", cond.record, "key = value output");

  RunOptions run_opts;
  auto* run_cmd = app.add_subcommand("run", "integrate an example and write CSV output");
  run_cmd->add_option("example", run_opts.example, "ex1 or ex2")->required();
  run_cmd->add_option("--m", run_opts.m, "subintervals per delay (h = tau/m)");
  run_cmd->add_option("--tableau", run_opts.tableau, "built-in name or tableau file");
  run_cmd->add_option("--rule", run_opts.rule, "simpson or trapezoid");
  run_cmd->add_option("--t-end", run_opts.t_end, "final time (default 5pi/2 for ex1, 10 for ex2)");
  run_cmd->add_flag("--perturbed", run_opts.perturbed, "also run the perturbed initial data and write errors.csv");
  run_cmd->add_option("--out", run_opts.out_dir, "output directory");
  run_cmd->add_option("--ns", run_opts.n_s, "spatial intervals for ex1");
  run_cmd->add_option("--forcing", run_opts.forcing, "ex1 forcing: consistent or as-printed");

  std::string manifest_path;
  std::optional<std::string> rerun_out;
  auto* rerun_cmd = app.add_subcommand("rerun", "repeat a run from its manifest");
  rerun_cmd->add_option("manifest", manifest_path, "manifest.txt written by run")->required();
  rerun_cmd->add_option("--out", rerun_out, "output directory (default: the one in the manifest)");

  std::string which = "all";
  std::optional<std::string> tables_out;
  bool tables_serial = false;
  auto* tables_cmd = app.add_subcommand("tables", "perturbation-difference tables for both examples");
  tables_cmd->add_option("--which", which, "1, 2 or all");
  tables_cmd->add_option("--out", tables_out, "directory for table CSVs");
  tables_cmd->add_flag("--serial", tables_serial, "run one integration at a time");

  std::string conv_example;
  std::string conv_m = "10,20,40";
  std::optional<double> conv_t;
  int conv_ns = 10;
  std::optional<std::string> conv_out;
  bool conv_serial = false;
  auto* conv_cmd = app.add_subcommand("convergence", "observed order against the closed-form solution");
  conv_cmd->add_option("example", conv_example, "ex1 or ex2")->required();
  conv_cmd->add_option("--m", conv_m, "comma-separated increasing step counts");
  conv_cmd->add_option("--t-eval", conv_t, "evaluation time (default 2 for ex2, pi/2 for ex1)");
  conv_cmd->add_option("--ns", conv_ns, "spatial intervals for ex1");
  conv_cmd->add_option("--out", conv_out, "directory for convergence.csv");
  conv_cmd->add_flag("--serial", conv_serial, "run one integration at a time");

  auto* info_cmd = app.add_subcommand("info", "built-in tableaux, rules and examples");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*check_tab) return cmd_check_tableau(tab_opts, out);
    if (*check_cond) return cmd_check_conditions(cond, out);
    if (*run_cmd) return cmd_run(run_opts, out);
    if (*rerun_cmd) return cmd_rerun(manifest_path, rerun_out, out);
    if (*tables_cmd) return cmd_tables(which, tables_out, tables_serial, out);
    if (*conv_cmd) return cmd_convergence(conv_example, conv_m, conv_t, conv_ns, conv_out, conv_serial, out);
    if (*info_cmd) return cmd_info(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace cqrk::cli
