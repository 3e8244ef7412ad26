#include "cqrk/tableau.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace cqrk {

ButcherTableau::ButcherTableau(std::string name, Matrix a, Vector b, Vector c)
    : name_(std::move(name)), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
  const std::size_t s = b_.size();
  if (s == 0) throw std::invalid_argument("tableau '" + name_ + "': zero stages");
  if (a_.rows() != s || a_.cols() != s || c_.size() != s)
    throw std::invalid_argument("tableau '" + name_ + "': inconsistent A/b/c sizes");
  const double bsum = std::accumulate(b_.begin(), b_.end(), 0.0);
  if (std::abs(bsum - 1.0) > 1e-14)
    throw std::invalid_argument("tableau '" + name_ + "': weights b do not sum to 1");
  for (double ci : c_)
    if (!(ci >= 0.0 && ci <= 1.0))
      throw std::invalid_argument("tableau '" + name_ + "': node outside [0,1]");
}

bool ButcherTableau::is_explicit() const {
  for (std::size_t i = 0; i < stages(); ++i)
    for (std::size_t j = i; j < stages(); ++j)
      if (a_(i, j) != 0.0) return false;
  return true;
}

bool ButcherTableau::is_stiffly_accurate() const {
  const std::size_t last = stages() - 1;
  for (std::size_t j = 0; j < stages(); ++j)
    if (a_(last, j) != b_[j]) return false;
  return true;
}

ButcherTableau lobatto_iiic_2() {
  return {"lobatto-iiic-2",
          Matrix{{ratio(1, 2), ratio(-1, 2)}, {ratio(1, 2), ratio(1, 2)}},
          {ratio(1, 2), ratio(1, 2)},
          {0.0, 1.0}};
}

ButcherTableau classical_rk4() {
  return {"rk4",
          Matrix{{0.0, 0.0, 0.0, 0.0},
                 {ratio(1, 2), 0.0, 0.0, 0.0},
                 {0.0, ratio(1, 2), 0.0, 0.0},
                 {0.0, 0.0, 1.0, 0.0}},
          {ratio(1, 6), ratio(1, 3), ratio(1, 3), ratio(1, 6)},
          {0.0, ratio(1, 2), ratio(1, 2), 1.0}};
}

ButcherTableau implicit_midpoint() {
  return {"implicit-midpoint", Matrix{{ratio(1, 2)}}, {1.0}, {ratio(1, 2)}};
}

ButcherTableau backward_euler() { return {"backward-euler", Matrix{{1.0}}, {1.0}, {1.0}}; }

std::optional<ButcherTableau> builtin_tableau(const std::string& name) {
  if (name == "lobatto-iiic-2") return lobatto_iiic_2();
  if (name == "rk4") return classical_rk4();
  if (name == "implicit-midpoint") return implicit_midpoint();
  if (name == "backward-euler") return backward_euler();
  return std::nullopt;
}

namespace {

double parse_number(const std::string& token) {
  auto parse_plain = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("tableau file: malformed number '" + token + "'");
    }
    if (used != text.size()) throw std::invalid_argument("tableau file: malformed number '" + token + "'");
    return v;
  };
  const auto slash = token.find('/');
  if (slash == std::string::npos) return parse_plain(token);
  const double num = parse_plain(token.substr(0, slash));
  const double den = parse_plain(token.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("tableau file: zero denominator in '" + token + "'");
  return num / den;
}

std::vector<double> parse_row(const std::string& line) {
  std::istringstream ls(line);
  std::vector<double> row;
  std::string tok;
  while (ls >> tok) row.push_back(parse_number(tok));
  return row;
}

}  // namespace

ButcherTableau parse_tableau(std::istream& in, std::string name) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw std::invalid_argument("tableau file: empty");

  const auto header = parse_row(lines[0]);
  if (header.size() != 1 || header[0] < 1 || header[0] != std::floor(header[0]))
    throw std::invalid_argument("tableau file: first line must be the stage count");
  const auto s = static_cast<std::size_t>(header[0]);
  if (lines.size() != s + 3)
    throw std::invalid_argument("tableau file: expected " + std::to_string(s + 3) + " non-empty lines, got " +
                                std::to_string(lines.size()));

  Matrix a(s, s);
  for (std::size_t i = 0; i < s; ++i) {
    const auto row = parse_row(lines[1 + i]);
    if (row.size() != s) throw std::invalid_argument("tableau file: row " + std::to_string(i + 1) + " of A has wrong length");
    for (std::size_t j = 0; j < s; ++j) a(i, j) = row[j];
  }
  auto b = parse_row(lines[1 + s]);
  auto c = parse_row(lines[2 + s]);
  if (b.size() != s) throw std::invalid_argument("tableau file: b has wrong length");
  if (c.size() != s) throw std::invalid_argument("tableau file: c has wrong length");
  return {std::move(name), std::move(a), std::move(b), std::move(c)};
}

Matrix stability_matrix(const ButcherTableau& tab, double k, double l, const Vector& d) {
  const std::size_t s = tab.stages();
  if (d.size() != s) throw std::invalid_argument("stability_matrix: D has wrong length");
  for (double di : d)
    if (!(di >= 0.0)) throw std::invalid_argument("stability_matrix: D entries must be nonnegative");

  const Matrix& a = tab.a();
  const Vector& b = tab.b();
  Matrix m(s + 1, s + 1);

  const double ede = std::accumulate(d.begin(), d.end(), 0.0);
  m(0, 0) = k - 1.0 - 2.0 * l * ede;

  for (std::size_t j = 0; j < s; ++j) {
    double eda = 0.0;  // (e'DA)_j
    for (std::size_t i = 0; i < s; ++i) eda += d[i] * a(i, j);
    m(0, j + 1) = d[j] - b[j] - 2.0 * l * eda;
  }

  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = i; j < s; ++j) {
      double adA = 0.0;  // (A'DA)_ij
      for (std::size_t r = 0; r < s; ++r) adA += a(r, i) * d[r] * a(r, j);
      m(i + 1, j + 1) = d[i] * a(i, j) + a(j, i) * d[j] - b[i] * b[j] - 2.0 * l * adA;
    }
  }

  for (std::size_t i = 0; i <= s; ++i)
    for (std::size_t j = i + 1; j <= s; ++j) m(j, i) = m(i, j);
  return m;
}

StabilityVerdict is_algebraically_stable(const ButcherTableau& tab, double k, double l,
                                         const std::optional<Vector>& d, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("is_algebraically_stable: tol must be positive");
  StabilityVerdict verdict;
  verdict.d_used = d.value_or(tab.b());
  verdict.matrix_m = stability_matrix(tab, k, l, verdict.d_used);
  if (max_abs_asymmetry(verdict.matrix_m) > 1e-12)
    throw std::logic_error("is_algebraically_stable: assembled matrix is not symmetric");
  const Vector eig = symmetric_eigenvalues(verdict.matrix_m);
  verdict.min_eigenvalue = eig.front();
  verdict.psd = verdict.min_eigenvalue >= -tol;
  return verdict;
}

AsymptoticPrerequisites asymptotic_prerequisites(const ButcherTableau& tab) {
  const LuDecomposition lu(tab.a());
  AsymptoticPrerequisites out;
  out.det_a = lu.determinant();
  if (std::abs(out.det_a) <= 1e-14)
    throw SingularTableauError("tableau '" + tab.name() + "': det A = 0, growth factor undefined");
  const Vector ones(tab.stages(), 1.0);
  const Vector ainv_e = lu.solve(ones);
  double bt = 0.0;
  for (std::size_t j = 0; j < tab.stages(); ++j) bt += tab.b()[j] * ainv_e[j];
  out.growth = std::abs(1.0 - bt);
  return out;
}

}  // namespace cqrk
