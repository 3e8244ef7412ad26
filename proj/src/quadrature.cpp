#include "cqrk/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cqrk {

QuadratureRule::QuadratureRule(std::string name, double h, Vector weights)
    : name_(std::move(name)), h_(h), weights_(std::move(weights)) {
  if (weights_.size() < 2) throw std::invalid_argument("QuadratureRule: need at least two nodes");
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw std::invalid_argument("QuadratureRule: step must be positive");
}

QuadratureRule compound_simpson(int m, double tau) {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("compound_simpson: m must be even and >= 2");
  if (!(tau > 0.0)) throw std::invalid_argument("compound_simpson: tau must be positive");
  Vector w(static_cast<std::size_t>(m) + 1);
  for (int q = 1; q < m; ++q) w[q] = (q % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0;
  w.front() = w.back() = 1.0 / 3.0;
  return {"simpson", tau / m, std::move(w)};
}

QuadratureRule compound_trapezoid(int m, double tau) {
  if (m < 1) throw std::invalid_argument("compound_trapezoid: m must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("compound_trapezoid: tau must be positive");
  Vector w(static_cast<std::size_t>(m) + 1, 1.0);
  w.front() = w.back() = 0.5;
  return {"trapezoid", tau / m, std::move(w)};
}

QuadratureRule make_rule(const std::string& name, int m, double tau) {
  if (name == "simpson") return compound_simpson(m, tau);
  if (name == "trapezoid") return compound_trapezoid(m, tau);
  throw std::invalid_argument("unknown quadrature rule '" + name + "'");
}

Vector apply(const QuadratureRule& rule, std::span<const Vector> samples) {
  if (samples.size() != rule.weights().size())
    throw std::invalid_argument("apply: expected " + std::to_string(rule.weights().size()) + " samples, got " +
                                std::to_string(samples.size()));
  const std::size_t dim = samples.front().size();
  Vector acc(dim, 0.0);
  for (std::size_t q = 0; q < samples.size(); ++q) {
    if (samples[q].size() != dim) throw std::invalid_argument("apply: samples of unequal dimension");
    const double w = rule.weight(q);
    for (std::size_t i = 0; i < dim; ++i) acc[i] += w * samples[q][i];
  }
  for (double& x : acc) x *= rule.h();
  return acc;
}

double apply(const QuadratureRule& rule, std::span<const double> samples) {
  if (samples.size() != rule.weights().size())
    throw std::invalid_argument("apply: expected " + std::to_string(rule.weights().size()) + " samples, got " +
                                std::to_string(samples.size()));
  double acc = 0.0;
  for (std::size_t q = 0; q < samples.size(); ++q) acc += rule.weight(q) * samples[q];
  return rule.h() * acc;
}

double mu_bound(const QuadratureRule& rule) {
  double sq = 0.0;
  for (double w : rule.weights()) sq += w * w;
  return rule.h() * std::sqrt(static_cast<double>(rule.weights().size()) * sq);
}

double max_weight(const QuadratureRule& rule) {
  double r = 0.0;
  for (double w : rule.weights()) r = std::max(r, std::abs(w));
  return r;
}

}  // namespace cqrk
