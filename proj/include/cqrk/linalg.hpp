#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace cqrk {

using Vector = std::vector<double>;

/// Dense row-major matrix for the small systems that show up in stage solves
/// and tableau analysis (a few dozen unknowns at most).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  Matrix transposed() const;
  Vector multiply(std::span<const double> x) const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

double max_abs_asymmetry(const Matrix& m);

double norm_inf(std::span<const double> x);
double norm_2(std::span<const double> x);

/// LU factorization with partial (row) pivoting, PA = LU.
class LuDecomposition {
 public:
  explicit LuDecomposition(Matrix a);

  /// True when some pivot is exactly zero; solve() throws in that case.
  bool singular() const { return singular_; }
  double determinant() const;
  Vector solve(std::span<const double> rhs) const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  int sign_ = 1;
  bool singular_ = false;
};

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Only the upper triangle is read.
Vector symmetric_eigenvalues(const Matrix& m, double tol = 1e-15, int max_sweeps = 100);

}  // namespace cqrk
