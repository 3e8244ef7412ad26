#pragma once

#include <istream>
#include <optional>
#include <stdexcept>
#include <string>

#include "cqrk/linalg.hpp"

namespace cqrk {

/// Exact small-integer ratio evaluated in binary floating point.
constexpr double ratio(long num, long den) { return static_cast<double>(num) / static_cast<double>(den); }

/// Coefficients (A, b, c) of an s-stage Runge-Kutta method.
///
/// Construction checks shapes, sum(b) = 1 within 1e-14 and c in [0, 1].
/// Row-sum consistency A e = c is not enforced (user tableaus may violate it
/// deliberately); the built-ins satisfy it.
class ButcherTableau {
 public:
  ButcherTableau(std::string name, Matrix a, Vector b, Vector c);

  const std::string& name() const { return name_; }
  std::size_t stages() const { return b_.size(); }
  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  const Vector& c() const { return c_; }

  /// Strictly lower-triangular A.
  bool is_explicit() const;
  /// Last row of A equals b exactly.
  bool is_stiffly_accurate() const;

 private:
  std::string name_;
  Matrix a_;
  Vector b_;
  Vector c_;
};

ButcherTableau lobatto_iiic_2();
ButcherTableau classical_rk4();
ButcherTableau implicit_midpoint();
ButcherTableau backward_euler();

/// Built-in lookup by CLI name: lobatto-iiic-2, rk4, implicit-midpoint, backward-euler.
std::optional<ButcherTableau> builtin_tableau(const std::string& name);

/// Plain-text tableau: `s`, then s rows of A, one row b, one row c. Entries are
/// whitespace separated decimals or `p/q` rationals. Throws std::invalid_argument.
ButcherTableau parse_tableau(std::istream& in, std::string name = "file");

/// The (s+1)x(s+1) matrix whose positive semi-definiteness defines
/// (k,l)-algebraic stability with weights D = diag(d):
///
///   [ k - 1 - 2l e'De            e'D - b' - 2l e'DA          ]
///   [ (e'D - b' - 2l e'DA)'      DA + A'D - bb' - 2l A'DA    ]
///
/// Only the upper triangle is computed; the lower one is mirrored.
Matrix stability_matrix(const ButcherTableau& tab, double k, double l, const Vector& d);

struct StabilityVerdict {
  bool psd = false;
  double min_eigenvalue = 0.0;
  Matrix matrix_m;
  Vector d_used;
};

/// PSD test of stability_matrix via a symmetric eigen-solve. D defaults to b.
StabilityVerdict is_algebraically_stable(const ButcherTableau& tab, double k = 1.0, double l = 0.0,
                                         const std::optional<Vector>& d = std::nullopt,
                                         double tol = 1e-10);

class SingularTableauError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AsymptoticPrerequisites {
  double det_a = 0.0;
  /// |1 - b' A^{-1} e|; the asymptotic result needs it strictly below 1.
  double growth = 0.0;
};

/// Throws SingularTableauError when |det A| <= 1e-14.
AsymptoticPrerequisites asymptotic_prerequisites(const ButcherTableau& tab);

}  // namespace cqrk
