#pragma once

#include <compare>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace dyadlab {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", an integer, or a finite decimal ("0.25") exactly.
Rational parse_rational(const std::string& text);

/// a + b sqrt(d) in Q(sqrt d), d a positive non-square integer (d = 0 means
/// plain rationals).  Mixing different d is an error.
class QuadraticNumber {
 public:
  QuadraticNumber() = default;
  QuadraticNumber(Rational a) : a_(std::move(a)) {}  // NOLINT: implicit from Q
  QuadraticNumber(Rational a, Rational b, long d);
  QuadraticNumber(long a) : a_(a) {}  // NOLINT

  static QuadraticNumber sqrt_of(long d) { return {Rational(0), Rational(1), d}; }

  const Rational& rational_part() const { return a_; }
  const Rational& sqrt_coeff() const { return b_; }
  long radicand() const { return d_; }

  double to_double() const;
  int sign() const;
  QuadraticNumber conjugate() const;
  QuadraticNumber inverse() const;
  std::string to_string() const;

  friend QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y);
  friend QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y);
  QuadraticNumber operator-() const { return {-a_, -b_, d_}; }

  friend bool operator==(const QuadraticNumber& x, const QuadraticNumber& y) {
    return x.a_ == y.a_ && x.b_ == y.b_;
  }
  /// Numeric order.
  friend bool operator<(const QuadraticNumber& x, const QuadraticNumber& y) {
    return (x - y).sign() < 0;
  }

 private:
  Rational a_ = 0;
  Rational b_ = 0;
  long d_ = 0;

  static long common_radicand(const QuadraticNumber& x, const QuadraticNumber& y);
};

/// Structural (not numeric) total order, cheap; for use as a map key.
struct QuadraticKeyLess {
  bool operator()(const QuadraticNumber& x, const QuadraticNumber& y) const {
    if (x.rational_part() != y.rational_part()) return x.rational_part() < y.rational_part();
    return x.sqrt_coeff() < y.sqrt_coeff();
  }
};

}  // namespace dyadlab
