#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cqrk {

/// One-sided Lipschitz constant alpha and classical constants L1..L7 of a
/// problem, together with its delay.
struct ProblemConstants {
  double alpha = 0.0;
  std::array<double, 7> lipschitz{};  // L1..L7 at indices 0..6
  double tau = 1.0;

  double L(int i) const { return lipschitz.at(static_cast<std::size_t>(i - 1)); }
  /// Throws std::invalid_argument unless alpha <= 0, every L >= 0 and tau > 0.
  void validate() const;
};

/// Quadrature bound mu, max |gamma_q|, the (k,l) pair and the step h.
struct MethodConstants {
  double mu = 0.0;
  double gamma_max = 0.0;
  double k = 1.0;
  double l = 0.0;
  double h = 0.0;

  void validate() const;
};

using NamedValues = std::vector<std::pair<std::string, double>>;

struct CriterionReport {
  std::string name;
  bool satisfied = false;
  NamedValues lhs_values;
  NamedValues margins;  // bound - value; every one must be > 0

  std::optional<double> lhs(const std::string& key) const;
  std::optional<double> margin(const std::string& key) const;
};

/// Margins within this distance of zero count as violated; every condition is strict.
inline constexpr double kBoundaryTolerance = 1e-14;

/// Delay comparison principle: decay iff H < 1 and -A + B + C G / (1 - H) < 0.
CriterionReport halanay_margin(double A, double B, double C, double G, double H);

/// Conditions for the exact-solution perturbation bound:
/// L3 L7 tau < 1 and alpha + L1 L4 tau + L1 L5 tau (L2 + L3 L6 tau) / (1 - L3 L7 tau) < 0.
CriterionReport continuous_stability_check(const ProblemConstants& pc);

/// The bracket 2 alpha + L1 + 2 mu^2 L1 L4^2 + 2 mu^2 L1 L5^2 (2 L2^2 + 4 mu^2 L3^2 L6^2) / (1 - 4 mu^2 L3^2 L7^2)
/// shared by the discrete criteria. Requires 4 mu^2 L3^2 L7^2 != 1.
double discrete_bracket(const ProblemConstants& pc, double mu);

/// Discrete global stability: 4 mu^2 L3^2 L7^2 < 1, 2 gamma tau L3 L7 < 1 and h * bracket < 2 l.
CriterionReport global_stability_check(const ProblemConstants& pc, const MethodConstants& mc);

/// Discrete asymptotic stability: the same side conditions and bracket < 0. The
/// tableau prerequisites (det A != 0, |1 - b'A^{-1}e| < 1) are checked separately.
CriterionReport asymptotic_stability_check(const ProblemConstants& pc, const MethodConstants& mc);

}  // namespace cqrk
