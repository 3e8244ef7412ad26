#include "cqrk/stability_criteria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqrk {

void ProblemConstants::validate() const {
  if (!(alpha <= 0.0)) throw std::invalid_argument("ProblemConstants: alpha must be <= 0");
  for (double li : lipschitz)
    if (!(li >= 0.0)) throw std::invalid_argument("ProblemConstants: Lipschitz constants must be >= 0");
  if (!(tau > 0.0)) throw std::invalid_argument("ProblemConstants: tau must be positive");
}

void MethodConstants::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("MethodConstants: mu must be positive");
  if (!(gamma_max > 0.0)) throw std::invalid_argument("MethodConstants: gamma must be positive");
  if (!(k > 0.0 && k <= 1.0)) throw std::invalid_argument("MethodConstants: k must lie in (0, 1]");
  if (!(h > 0.0)) throw std::invalid_argument("MethodConstants: h must be positive");
}

namespace {

std::optional<double> find(const NamedValues& values, const std::string& key) {
  const auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == key; });
  if (it == values.end()) return std::nullopt;
  return it->second;
}

void finish(CriterionReport& report) {
  report.satisfied = std::all_of(report.margins.begin(), report.margins.end(),
                                 [](const auto& kv) { return kv.second > kBoundaryTolerance; });
}

// Adds the two side conditions shared by both discrete criteria; returns
// whether the bracket denominator is admissible.
bool side_conditions(CriterionReport& report, const ProblemConstants& pc, const MethodConstants& mc) {
  const double mu2 = mc.mu * mc.mu;
  const double denom_term = 4.0 * mu2 * pc.L(3) * pc.L(3) * pc.L(7) * pc.L(7);
  const double delay_term = 2.0 * mc.gamma_max * pc.tau * pc.L(3) * pc.L(7);
  report.lhs_values.emplace_back("4mu^2L3^2L7^2", denom_term);
  report.margins.emplace_back("4mu^2L3^2L7^2", 1.0 - denom_term);
  report.lhs_values.emplace_back("2gamma*tau*L3L7", delay_term);
  report.margins.emplace_back("2gamma*tau*L3L7", 1.0 - delay_term);
  return 1.0 - denom_term > kBoundaryTolerance;
}

}  // namespace

std::optional<double> CriterionReport::lhs(const std::string& key) const { return find(lhs_values, key); }
std::optional<double> CriterionReport::margin(const std::string& key) const { return find(margins, key); }

CriterionReport halanay_margin(double A, double B, double C, double G, double H) {
  if (!(A > 0.0)) throw std::invalid_argument("halanay_margin: A must be positive");
  if (!(B >= 0.0 && C >= 0.0 && G >= 0.0 && H >= 0.0))
    throw std::invalid_argument("halanay_margin: B, C, G, H must be nonnegative");

  CriterionReport report;
  report.name = "halanay";
  report.lhs_values.emplace_back("H", H);
  report.margins.emplace_back("H", 1.0 - H);
  if (1.0 - H > kBoundaryTolerance) {
    const double rate = -A + B + C * G / (1.0 - H);
    report.lhs_values.emplace_back("-A+B+CG/(1-H)", rate);
    report.margins.emplace_back("-A+B+CG/(1-H)", -rate);
  }
  finish(report);
  return report;
}

CriterionReport continuous_stability_check(const ProblemConstants& pc) {
  pc.validate();
  CriterionReport report;
  report.name = "continuous";
  const double tau = pc.tau;
  const double delay_term = pc.L(3) * pc.L(7) * tau;
  report.lhs_values.emplace_back("L3L7tau", delay_term);
  report.margins.emplace_back("L3L7tau", 1.0 - delay_term);
  if (1.0 - delay_term > kBoundaryTolerance) {
    const double main = pc.alpha + pc.L(1) * pc.L(4) * tau +
                        pc.L(1) * pc.L(5) * tau * (pc.L(2) + pc.L(3) * pc.L(6) * tau) / (1.0 - delay_term);
    report.lhs_values.emplace_back("main", main);
    report.margins.emplace_back("main", -main);
  }
  finish(report);
  return report;
}

double discrete_bracket(const ProblemConstants& pc, double mu) {
  const double mu2 = mu * mu;
  const double L1 = pc.L(1), L2 = pc.L(2), L3 = pc.L(3), L4 = pc.L(4), L5 = pc.L(5), L6 = pc.L(6), L7 = pc.L(7);
  const double denom = 1.0 - 4.0 * mu2 * L3 * L3 * L7 * L7;
  if (denom == 0.0) throw std::domain_error("discrete_bracket: 4 mu^2 L3^2 L7^2 = 1");
  return 2.0 * pc.alpha + L1 + 2.0 * mu2 * L1 * L4 * L4 +
         2.0 * mu2 * L1 * L5 * L5 * (2.0 * L2 * L2 + 4.0 * mu2 * L3 * L3 * L6 * L6) / denom;
}

CriterionReport global_stability_check(const ProblemConstants& pc, const MethodConstants& mc) {
  pc.validate();
  mc.validate();
  CriterionReport report;
  report.name = "global";
  if (side_conditions(report, pc, mc)) {
    const double bracket = discrete_bracket(pc, mc.mu);
    report.lhs_values.emplace_back("bracket", bracket);
    report.lhs_values.emplace_back("h*bracket", mc.h * bracket);
    report.margins.emplace_back("h*bracket", 2.0 * mc.l - mc.h * bracket);
  }
  finish(report);
  return report;
}

CriterionReport asymptotic_stability_check(const ProblemConstants& pc, const MethodConstants& mc) {
  pc.validate();
  mc.validate();
  CriterionReport report;
  report.name = "asymptotic";
  if (side_conditions(report, pc, mc)) {
    const double bracket = discrete_bracket(pc, mc.mu);
    report.lhs_values.emplace_back("bracket", bracket);
    report.margins.emplace_back("bracket", -bracket);
  }
  finish(report);
  return report;
}

}  // namespace cqrk
