#ifndef SANDPILE_POTENTIAL_KERNEL_HPP
#define SANDPILE_POTENTIAL_KERNEL_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "sandpile/graph.hpp"
#include "sandpile/matrix.hpp"

namespace sandpile {

class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Potential kernel of simple random walk on Z^2 for max(|x|,|y|) <= radius.
//
// Every value has the form A + B/pi with A, B rational. The diagonal is
// a(n,n) = (4/pi) * sum_{k<=n} 1/(2k-1), a(1,0) = 1, and harmonicity
// away from 0 fills in the rest one diagonal level at a time. The
// rationals are exact; A and B grow quickly and cancel, so the decimal
// values are taken with MPFR at a working precision chosen from their
// size.
class PotentialKernelTable {
 public:
  // `digits`: decimal digits that the evaluation must keep. Throws
  // PrecisionError if the harmonic defect or the asymptotic expansion
  // check fails at that accuracy.
  explicit PotentialKernelTable(int radius, int digits = 20);

  int radius() const { return radius_; }
  int digits() const { return digits_; }
  long working_bits() const { return bits_; }

  double operator()(int x, int y) const;
  double at(Point p) const { return (*this)(p.x, p.y); }
  bool contains(Point p) const;

  const Rational& rational_part(int x, int y) const;
  const Rational& inverse_pi_part(int x, int y) const;
  // Decimal string with the requested digits.
  std::string decimal(int x, int y, int digits) const;

  // (2/pi) ln r + (2 gamma + ln 8)/pi - cos(4 theta) / (6 pi r^2)
  static double asymptotic(int x, int y);

  // Largest |a - asymptotic| over the rim max(|x|,|y|) = radius.
  double rim_deviation() const { return rim_deviation_; }
  // Largest |mean of the 4 neighbours - a - [x = 0]| over the table interior.
  double harmonic_defect() const { return harmonic_defect_; }

 private:
  std::size_t slot(int x, int y) const;

  int radius_;
  int digits_;
  long bits_ = 0;
  std::vector<Rational> A_;
  std::vector<Rational> B_;
  std::vector<double> value_;
  double rim_deviation_ = 0.0;
  double harmonic_defect_ = 0.0;
};

}  // namespace sandpile

#endif  // SANDPILE_POTENTIAL_KERNEL_HPP
