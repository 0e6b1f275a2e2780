#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace zslcraft::linalg {

/// Dense row-major matrix of doubles.
///
/// Every exported operation returns finite entries or throws; constructing from
/// raw data validates finiteness and the rows*cols length.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
/// a * b^T without materializing the transpose.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);
/// a^T * b without materializing the transpose.
Matrix transposed_matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);

/// Rows selected by index, in the given order.
Matrix gather_rows(const Matrix& a, std::span<const std::size_t> indices);
/// Stacks b below a.
Matrix vstack(const Matrix& a, const Matrix& b);

/// FNV-1a over shape and entry bit patterns; equal iff bit-identical (modulo collisions).
std::uint64_t fingerprint(const Matrix& a, std::uint64_t seed = 0xcbf29ce484222325ULL);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double max_abs(const Matrix& a);
double frobenius_norm(const Matrix& a);

/// Solves a*X = b for symmetric positive definite a via Cholesky.
/// Throws SingularMatrixError naming the first non-positive pivot.
Matrix solve_spd(const Matrix& a, const Matrix& b);

}  // namespace zslcraft::linalg
