#ifndef SANDPILE_MATRIX_HPP
#define SANDPILE_MATRIX_HPP

#include <gmpxx.h>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sandpile {

using BigInt = mpz_class;
using Rational = mpq_class;

// Scalar backend selector for the determinantal code paths.
enum class Backend { exact, float64 };

Backend parse_backend(const std::string& name);
std::string to_string(Backend backend);

// Dense row-major matrix. Small by design: the exact paths never see more
// than a few hundred rows.
template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  // Principal submatrix on the given row/column positions.
  Matrix principal(std::span<const std::size_t> positions) const {
    Matrix out(positions.size(), positions.size());
    for (std::size_t a = 0; a < positions.size(); ++a)
      for (std::size_t b = 0; b < positions.size(); ++b)
        out(a, b) = (*this)(positions[a], positions[b]);
    return out;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j)
      std::swap(data_[a * cols_ + j], data_[b * cols_ + j]);
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Fraction-free (Bareiss) elimination; every intermediate is an exact
/// integer minor, so there is no rational blow-up.
BigInt bareiss_determinant(Matrix<BigInt> m);

/// Exact determinant. Rows are scaled to integers by the lcm of their
/// denominators and the integer matrix goes through Bareiss.
Rational determinant(const Matrix<Rational>& m);

/// LU with partial pivoting.
double determinant(const Matrix<double>& m);

/// Solves a * x = b exactly (Gauss-Jordan over Q). Throws on singular a.
Matrix<Rational> solve(Matrix<Rational> a, Matrix<Rational> b);

Matrix<double> to_double(const Matrix<Rational>& m);

double to_double(const Rational& q);

// "p/q" (or "p" for integers).
std::string fraction_string(const Rational& q);

Rational parse_fraction(const std::string& text);

}  // namespace sandpile

#endif  // SANDPILE_MATRIX_HPP
