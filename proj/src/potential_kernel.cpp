#include "sandpile/potential_kernel.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <utility>

namespace sandpile {

namespace {

class Real {
 public:
  explicit Real(long bits) { mpfr_init2(v_, bits); }
  ~Real() { mpfr_clear(v_); }
  Real(const Real&) = delete;
  Real& operator=(const Real&) = delete;
  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

long bit_size(const Rational& q) {
  return static_cast<long>(mpz_sizeinbase(q.get_num_mpz_t(), 2) +
                           mpz_sizeinbase(q.get_den_mpz_t(), 2));
}

// value = A + B / pi
void evaluate(Real& out, const Rational& A, const Rational& B, const Real& pi, long bits) {
  Real tmp(bits);
  mpfr_set_q(tmp.get(), B.get_mpq_t(), MPFR_RNDN);
  mpfr_div(tmp.get(), tmp.get(), pi.get(), MPFR_RNDN);
  mpfr_set_q(out.get(), A.get_mpq_t(), MPFR_RNDN);
  mpfr_add(out.get(), out.get(), tmp.get(), MPFR_RNDN);
}

}  // namespace

std::size_t PotentialKernelTable::slot(int x, int y) const {
  x = std::abs(x);
  y = std::abs(y);
  if (y > x) std::swap(x, y);
  return static_cast<std::size_t>(x) * (x + 1) / 2 + y;
}

bool PotentialKernelTable::contains(Point p) const {
  return std::max(std::abs(p.x), std::abs(p.y)) <= radius_;
}

PotentialKernelTable::PotentialKernelTable(int radius, int digits)
    : radius_(radius), digits_(digits) {
  if (radius < 1) throw std::invalid_argument("potential kernel radius must be at least 1");
  if (radius > 1000) throw PrecisionError("potential kernel radius above 1000 is not supported");
  if (digits < 1 || digits > 200) throw std::invalid_argument("digits must be in [1, 200]");
  const int n = radius + 1;  // one extra ring for the harmonic check
  const std::size_t size = static_cast<std::size_t>(n + 1) * (n + 2) / 2;
  A_.assign(size, Rational(0));
  B_.assign(size, Rational(0));
  auto set = [&](int x, int y, Rational a, Rational b) {
    A_[slot(x, y)] = std::move(a);
    B_[slot(x, y)] = std::move(b);
  };

  Rational odd_sum = 0;
  for (int k = 1; k <= n; ++k) {
    odd_sum += Rational(1, 2 * k - 1);
    set(k, k, 0, 4 * odd_sum);
  }
  set(1, 0, 1, 0);
  for (int y = 1; y + 1 <= n; ++y)
    set(y + 1, y, 2 * A_[slot(y, y)] - A_[slot(y, y - 1)],
        2 * B_[slot(y, y)] - B_[slot(y, y - 1)]);
  // a(x+1, y) = 4 a(x, y) - a(x-1, y) - a(x, y+1) - a(x, y-1), level x - y = k
  for (int k = 1; k < n; ++k)
    for (int y = 0; y + k + 1 <= n; ++y) {
      const int x = y + k;
      const std::size_t c = slot(x, y), l = slot(x - 1, y), u = slot(x, y + 1),
                        d = slot(x, y - 1);
      set(x + 1, y, 4 * A_[c] - A_[l] - A_[u] - A_[d], 4 * B_[c] - B_[l] - B_[u] - B_[d]);
    }

  long max_bits = 0;
  for (std::size_t i = 0; i < size; ++i)
    max_bits = std::max({max_bits, bit_size(A_[i]), bit_size(B_[i])});
  bits_ = max_bits + static_cast<long>(std::ceil(digits * 3.33)) + 64;

  Real pi(bits_);
  mpfr_const_pi(pi.get(), MPFR_RNDN);
  std::vector<double> full(size);
  std::vector<std::unique_ptr<Real>> exact;
  exact.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    exact.push_back(std::make_unique<Real>(bits_));
    evaluate(*exact.back(), A_[i], B_[i], pi, bits_);
    full[i] = mpfr_get_d(exact.back()->get(), MPFR_RNDN);
  }

  // Harmonic defect, measured at working precision.
  Real sum(bits_), tol(64);
  mpfr_set_ui(tol.get(), 10, MPFR_RNDN);
  mpfr_pow_si(tol.get(), tol.get(), -digits, MPFR_RNDN);
  for (int x = 0; x <= radius; ++x)
    for (int y = 0; y <= x; ++y) {
      mpfr_set_zero(sum.get(), 1);
      for (const Point step : kLatticeSteps)
        mpfr_add(sum.get(), sum.get(), exact[slot(x + step.x, y + step.y)]->get(), MPFR_RNDN);
      mpfr_div_ui(sum.get(), sum.get(), 4, MPFR_RNDN);
      mpfr_sub(sum.get(), sum.get(), exact[slot(x, y)]->get(), MPFR_RNDN);
      if (x == 0 && y == 0) mpfr_sub_ui(sum.get(), sum.get(), 1, MPFR_RNDN);
      mpfr_abs(sum.get(), sum.get(), MPFR_RNDN);
      harmonic_defect_ = std::max(harmonic_defect_, mpfr_get_d(sum.get(), MPFR_RNDU));
      if (mpfr_cmp(sum.get(), tol.get()) > 0)
        throw PrecisionError("harmonic defect above 1e-" + std::to_string(digits) +
                             " at radius " + std::to_string(radius));
    }

  value_.assign(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(
                                                 static_cast<std::size_t>(radius + 1) *
                                                 (radius + 2) / 2));
  A_.resize(value_.size());
  B_.resize(value_.size());

  if (radius >= 8) {
    for (int y = 0; y <= radius; ++y)
      rim_deviation_ =
          std::max(rim_deviation_, std::abs((*this)(radius, y) - asymptotic(radius, y)));
    // next term of the expansion is O(r^-4) with a small constant
    const double allowed = 1.0 / std::pow(static_cast<double>(radius), 4);
    if (rim_deviation_ > allowed)
      throw PrecisionError("potential kernel disagrees with its asymptotic expansion at the rim");
  }
}

double PotentialKernelTable::operator()(int x, int y) const {
  if (std::max(std::abs(x), std::abs(y)) > radius_)
    throw std::out_of_range("point outside the potential kernel table");
  return value_[slot(x, y)];
}

const Rational& PotentialKernelTable::rational_part(int x, int y) const {
  if (std::max(std::abs(x), std::abs(y)) > radius_)
    throw std::out_of_range("point outside the potential kernel table");
  return A_[slot(x, y)];
}

const Rational& PotentialKernelTable::inverse_pi_part(int x, int y) const {
  if (std::max(std::abs(x), std::abs(y)) > radius_)
    throw std::out_of_range("point outside the potential kernel table");
  return B_[slot(x, y)];
}

std::string PotentialKernelTable::decimal(int x, int y, int digits) const {
  Real pi(bits_), v(bits_);
  mpfr_const_pi(pi.get(), MPFR_RNDN);
  evaluate(v, rational_part(x, y), inverse_pi_part(x, y), pi, bits_);
  std::vector<char> buf(static_cast<std::size_t>(digits) + 32);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Rf", digits, v.get());
  return buf.data();
}

double PotentialKernelTable::asymptotic(int x, int y) {
  const double r2 = static_cast<double>(x) * x + static_cast<double>(y) * y;
  if (r2 == 0.0) return 0.0;
  const double pi = std::numbers::pi;
  const double theta = std::atan2(static_cast<double>(y), static_cast<double>(x));
  return std::log(r2) / pi + (2.0 * std::numbers::egamma + std::log(8.0)) / pi -
         std::cos(4.0 * theta) / (6.0 * pi * r2);
}

}  // namespace sandpile
