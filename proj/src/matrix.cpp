#include "sandpile/matrix.hpp"

#include <cmath>
#include <utility>

namespace sandpile {

Backend parse_backend(const std::string& name) {
  if (name == "exact" || name == "rational") return Backend::exact;
  if (name == "float" || name == "float64" || name == "double")
    return Backend::float64;
  throw std::invalid_argument("unknown backend '" + name + "'");
}

std::string to_string(Backend backend) {
  return backend == Backend::exact ? "exact" : "float64";
}

BigInt bareiss_determinant(Matrix<BigInt> m) {
  if (!m.square()) throw std::invalid_argument("determinant of non-square matrix");
  const std::size_t n = m.rows();
  if (n == 0) return BigInt(1);
  BigInt prev_pivot = 1;
  int sign = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t swap_with = k + 1;
      while (swap_with < n && m(swap_with, k) == 0) ++swap_with;
      if (swap_with == n) return BigInt(0);
      m.swap_rows(k, swap_with);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        // exact division: the numerator is prev_pivot times a minor
        BigInt v = m(k, k) * m(i, j) - m(i, k) * m(k, j);
        mpz_divexact(m(i, j).get_mpz_t(), v.get_mpz_t(), prev_pivot.get_mpz_t());
      }
    }
    prev_pivot = m(k, k);
  }
  BigInt det = m(n - 1, n - 1);
  return sign > 0 ? det : BigInt(-det);
}

Rational determinant(const Matrix<Rational>& m) {
  if (!m.square()) throw std::invalid_argument("determinant of non-square matrix");
  const std::size_t n = m.rows();
  Matrix<BigInt> ints(n, n);
  BigInt scale = 1;
  for (std::size_t i = 0; i < n; ++i) {
    BigInt row_lcm = 1;
    for (std::size_t j = 0; j < n; ++j)
      mpz_lcm(row_lcm.get_mpz_t(), row_lcm.get_mpz_t(),
              m(i, j).get_den_mpz_t());
    for (std::size_t j = 0; j < n; ++j) {
      Rational scaled = m(i, j) * row_lcm;
      ints(i, j) = scaled.get_num();
    }
    scale *= row_lcm;
  }
  Rational det(bareiss_determinant(std::move(ints)), scale);
  det.canonicalize();
  return det;
}

double determinant(const Matrix<double>& input) {
  if (!input.square()) throw std::invalid_argument("determinant of non-square matrix");
  Matrix<double> m = input;
  const std::size_t n = m.rows();
  double det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(pivot, k))) pivot = i;
    if (m(pivot, k) == 0.0) return 0.0;
    if (pivot != k) {
      m.swap_rows(pivot, k);
      det = -det;
    }
    det *= m(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m(i, k) / m(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det;
}

Matrix<Rational> solve(Matrix<Rational> a, Matrix<Rational> b) {
  if (!a.square() || a.rows() != b.rows())
    throw std::invalid_argument("solve: shape mismatch");
  const std::size_t n = a.rows();
  const std::size_t k = b.cols();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && a(pivot, c) == 0) ++pivot;
    if (pivot == n) throw std::runtime_error("solve: singular system");
    a.swap_rows(pivot, c);
    b.swap_rows(pivot, c);
    const Rational inv = 1 / a(c, c);
    for (std::size_t j = c; j < n; ++j) a(c, j) *= inv;
    for (std::size_t j = 0; j < k; ++j) b(c, j) *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == c || a(i, c) == 0) continue;
      const Rational f = a(i, c);
      for (std::size_t j = c; j < n; ++j) a(i, j) -= f * a(c, j);
      for (std::size_t j = 0; j < k; ++j) b(i, j) -= f * b(c, j);
    }
  }
  return b;
}

Matrix<double> to_double(const Matrix<Rational>& m) {
  Matrix<double> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j).get_d();
  return out;
}

double to_double(const Rational& q) { return q.get_d(); }

std::string fraction_string(const Rational& q) {
  Rational c = q;
  c.canonicalize();
  return c.get_str();
}

Rational parse_fraction(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  const std::string body = first == std::string::npos ? "" : text.substr(first, last - first + 1);
  const auto slash = body.find('/');
  BigInt num, den = 1;
  auto integer = [&](const std::string& part, BigInt& out) {
    const std::size_t start = !part.empty() && (part[0] == '-' || part[0] == '+') ? 1 : 0;
    if (part.size() == start ||
        part.find_first_not_of("0123456789", start) != std::string::npos)
      throw std::invalid_argument("not a fraction: '" + text + "'");
    out.set_str(part[0] == '+' ? part.substr(1) : part, 10);
  };
  integer(body.substr(0, slash), num);
  if (slash != std::string::npos) integer(body.substr(slash + 1), den);
  if (den == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

}  // namespace sandpile
