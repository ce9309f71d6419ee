#include "dyadlab/quadratic.hpp"

#include <cmath>
#include <sstream>

#include "dyadlab/error.hpp"

namespace dyadlab {

using boost::multiprecision::cpp_int;

namespace {

// Base-10 integer with optional sign.  cpp_int's own string constructor reads
// a leading 0 as octal, so digits are validated and converted here.
cpp_int decimal_integer(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
  if (i == text.size()) throw Error("bad integer");
  cpp_int v = 0;
  for (; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') throw Error("bad integer");
    v = v * 10 + (text[i] - '0');
  }
  return neg ? cpp_int(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text += c;
  if (text.empty()) throw Error("empty rational");
  try {
    if (auto slash = text.find('/'); slash != std::string::npos) {
      const cpp_int num = decimal_integer(text.substr(0, slash));
      const cpp_int den = decimal_integer(text.substr(slash + 1));
      if (den == 0) throw Error("zero denominator");
      return Rational(num, den);
    }
    if (auto dot = text.find('.'); dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      const std::size_t frac = text.size() - dot - 1;
      const cpp_int den = boost::multiprecision::pow(cpp_int(10), static_cast<unsigned>(frac));
      return Rational(decimal_integer(digits), den);
    }
    return Rational(decimal_integer(text));
  } catch (const Error& e) {
    if (std::string(e.what()) == "zero denominator") throw;
    throw Error("cannot parse rational '" + raw + "'");
  }
}

QuadraticNumber::QuadraticNumber(Rational a, Rational b, long d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
  if (d_ < 0) throw Error("negative radicand");
  if (d_ != 0) {
    const long root = static_cast<long>(std::llround(std::sqrt(static_cast<double>(d_))));
    if (root * root == d_) {
      a_ += b_ * root;
      b_ = 0;
      d_ = 0;
    }
  }
  if (d_ == 0 && b_ != 0) throw Error("sqrt coefficient without radicand");
}

long QuadraticNumber::common_radicand(const QuadraticNumber& x, const QuadraticNumber& y) {
  if (x.d_ == 0) return y.d_;
  if (y.d_ == 0 || y.d_ == x.d_) return x.d_;
  throw Error("mixed quadratic fields");
}

QuadraticNumber operator+(const QuadraticNumber& x, const QuadraticNumber& y) {
  const long d = QuadraticNumber::common_radicand(x, y);
  QuadraticNumber r;
  r.a_ = x.a_ + y.a_;
  r.b_ = x.b_ + y.b_;
  r.d_ = d;
  return r;
}

QuadraticNumber operator-(const QuadraticNumber& x, const QuadraticNumber& y) { return x + (-y); }

QuadraticNumber operator*(const QuadraticNumber& x, const QuadraticNumber& y) {
  const long d = QuadraticNumber::common_radicand(x, y);
  QuadraticNumber r;
  r.a_ = x.a_ * y.a_ + x.b_ * y.b_ * d;
  r.b_ = x.a_ * y.b_ + x.b_ * y.a_;
  r.d_ = d;
  return r;
}

QuadraticNumber QuadraticNumber::conjugate() const {
  QuadraticNumber r = *this;
  r.b_ = -b_;
  return r;
}

QuadraticNumber QuadraticNumber::inverse() const {
  const Rational norm = a_ * a_ - b_ * b_ * d_;
  if (norm == 0) throw Error("division by zero");
  QuadraticNumber r;
  r.a_ = a_ / norm;
  r.b_ = -b_ / norm;
  r.d_ = d_;
  return r;
}

QuadraticNumber operator/(const QuadraticNumber& x, const QuadraticNumber& y) {
  QuadraticNumber::common_radicand(x, y);
  return x * y.inverse();
}

int QuadraticNumber::sign() const {
  const int sa = a_.sign();
  const int sb = b_.sign();
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sb;
  // Opposite signs: compare a^2 with b^2 d.
  const Rational lhs = a_ * a_;
  const Rational rhs = b_ * b_ * d_;
  if (lhs == rhs) return 0;
  return lhs > rhs ? sa : sb;
}

double QuadraticNumber::to_double() const {
  return static_cast<double>(a_) + static_cast<double>(b_) * std::sqrt(static_cast<double>(d_));
}

std::string QuadraticNumber::to_string() const {
  std::ostringstream os;
  os << a_;
  if (b_ != 0) os << (b_ > 0 ? "+" : "-") << abs(b_) << "*sqrt(" << d_ << ")";
  return os.str();
}

}  // namespace dyadlab
