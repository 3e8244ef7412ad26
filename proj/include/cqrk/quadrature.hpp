#pragma once

#include <span>
#include <string>

#include "cqrk/linalg.hpp"

namespace cqrk {

/// Fixed-weight compound rule over the m+1 equally spaced nodes of one delay
/// window, m*h = tau. Weights are stored with h factored out.
class QuadratureRule {
 public:
  QuadratureRule(std::string name, double h, Vector weights);

  const std::string& name() const { return name_; }
  int m() const { return static_cast<int>(weights_.size()) - 1; }
  double h() const { return h_; }
  double span() const { return h_ * m(); }
  const Vector& weights() const { return weights_; }
  double weight(std::size_t q) const { return weights_[q]; }

 private:
  std::string name_;
  double h_;
  Vector weights_;
};

/// [1/3, 4/3, 2/3, ..., 4/3, 1/3]; m must be even and >= 2.
QuadratureRule compound_simpson(int m, double tau);
/// [1/2, 1, ..., 1, 1/2]; m >= 1.
QuadratureRule compound_trapezoid(int m, double tau);
/// By name: "simpson" or "trapezoid".
QuadratureRule make_rule(const std::string& name, int m, double tau);

/// h * sum_q w_q * samples[q]; samples must have exactly m+1 entries of one dimension.
Vector apply(const QuadratureRule& rule, std::span<const Vector> samples);
double apply(const QuadratureRule& rule, std::span<const double> samples);

/// h * sqrt((m+1) * sum_q w_q^2), the quantity that must stay below mu.
double mu_bound(const QuadratureRule& rule);

/// max_q |w_q|.
double max_weight(const QuadratureRule& rule);

}  // namespace cqrk
