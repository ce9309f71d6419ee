#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "dyadlab/error.hpp"
#include "dyadlab/ifs.hpp"
#include "dyadlab/quadratic.hpp"

namespace dyadlab {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

/// Value with first and second derivative in one parameter.
struct Jet2 {
  double v = 0.0, d1 = 0.0, d2 = 0.0;

  static Jet2 variable(double t) { return {t, 1.0, 0.0}; }
  static Jet2 constant(double c) { return {c, 0.0, 0.0}; }

  friend Jet2 operator+(Jet2 a, Jet2 b) { return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2}; }
  friend Jet2 operator-(Jet2 a, Jet2 b) { return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2}; }
  friend Jet2 operator*(Jet2 a, Jet2 b) {
    return {a.v * b.v, a.d1 * b.v + a.v * b.d1, a.d2 * b.v + 2.0 * a.d1 * b.d1 + a.v * b.d2};
  }
  friend Jet2 operator/(Jet2 a, Jet2 b) {
    const double q = a.v / b.v;
    const double q1 = (a.d1 - q * b.d1) / b.v;
    const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.v;
    return {q, q1, q2};
  }
  Jet2 operator-() const { return {-v, -d1, -d2}; }
};

/// Polynomial in the parameter t, coefficients in increasing degree.  An exact
/// rational copy is kept when the coefficients were given exactly.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : c_(std::move(c)) {}
  explicit Polynomial(std::vector<Rational> exact);
  static Polynomial constant(double c) { return Polynomial(std::vector<double>{c}); }

  const std::vector<double>& coefficients() const { return c_; }
  bool exact() const { return exact_.has_value(); }
  const std::vector<Rational>& exact_coefficients() const;
  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }

  double operator()(double t) const;
  Jet2 operator()(Jet2 t) const;
  BigFloat operator()(const BigFloat& t) const;
  QuadraticNumber operator()(const QuadraticNumber& t) const;

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  bool is_zero() const;
  bool operator==(const Polynomial& o) const;

 private:
  std::vector<double> c_;
  std::optional<std::vector<Rational>> exact_;
};

struct ParametricMap {
  Polynomial r;
  Polynomial s;
};

struct MapJet {
  Jet2 r;
  Jet2 s;
};

template <class T>
struct MapCoeffs {
  T r;
  T s;
};

/// A one-parameter family t -> WeightedIFS on an interval [lo, hi].  Either
/// polynomial (closed-form derivatives, optional exact coefficients) or a
/// callable (derivatives by Richardson-extrapolated central differences).
class ParametricFamily {
 public:
  using Callable = std::function<std::vector<AffineContraction>(double)>;

  static ParametricFamily polynomial(std::vector<ParametricMap> maps, std::vector<double> weights,
                                     double lo, double hi);
  static ParametricFamily callable(std::size_t alphabet, Callable f, std::vector<double> weights,
                                   double lo, double hi, double h = 1e-6);
  /// f_i(x) = t x + i, i in {0,1}, uniform weights.
  static ParametricFamily bernoulli_convolution(double lo = 0.5, double hi = 0.8);

  std::size_t alphabet() const { return alphabet_; }
  const std::vector<double>& weights() const { return weights_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool closed_form() const { return !callable_; }
  bool exact() const;
  double step() const { return h_; }
  const std::vector<ParametricMap>& polynomials() const;

  std::vector<AffineContraction> maps_at(double t) const;
  WeightedIFS at(double t) const;
  WeightedIFS at(double t, const std::vector<double>& weights) const;

  /// Per-map jets of (r, s) at t.  For callables the truncation estimate of
  /// the finite differences is written to *trunc when given.
  std::vector<MapJet> jets(double t, double* trunc = nullptr) const;

  std::vector<MapCoeffs<BigFloat>> coefficients(const BigFloat& t) const;
  /// Throws "exact arithmetic required" unless every coefficient is exact.
  std::vector<MapCoeffs<QuadraticNumber>> exact_coefficients(const QuadraticNumber& t) const;

  /// max over a sample grid of |r|, |r'|, |r''|, |s|, |s'|, |s''|; the recorded
  /// regularity constant C.
  double derivative_bound(int samples = 257) const;

 private:
  std::size_t alphabet_ = 0;
  std::vector<double> weights_;
  double lo_ = 0.0, hi_ = 1.0;
  double h_ = 1e-6;
  std::vector<ParametricMap> poly_;
  Callable callable_;
};

/// Eventually periodic coding P C^infinity.
struct Coding {
  std::vector<std::uint8_t> prefix;
  std::vector<std::uint8_t> period;

  /// "100(0)" = 1 0 0 0 0 0 ...; a bare word w means w(0).
  static Coding parse(const std::string& text);
  std::string to_string() const;
  std::uint8_t at(std::size_t i) const;
};

/// |x ^ y| (common prefix length); nullopt when x == y.
std::optional<std::size_t> common_prefix(const Coding& x, const Coding& y);
/// d(x,y) = 2^-|x^y|, 0 for equal codings.
double coding_distance(const Coding& x, const Coding& y);

/// f_x(0) for coefficient type T given per-symbol (r, s).
template <class T>
T coding_point(const std::vector<MapCoeffs<T>>& m, const Coding& x) {
  if (x.period.empty()) throw Error("period length 0");
  T rp = T(1), sp = T(0);
  for (auto i : x.prefix) {
    sp = rp * m.at(i).s + sp;
    rp = rp * m.at(i).r;
  }
  T rc = T(1), sc = T(0);
  for (auto i : x.period) {
    sc = rc * m.at(i).s + sc;
    rc = rc * m.at(i).r;
  }
  const T z = sc / (T(1) - rc);
  return rp * z + sp;
}

struct DeltaJet {
  double delta = 0.0, d1 = 0.0, d2 = 0.0;
  double truncation_error = 0.0;  // 0 for closed-form families
};

/// Delta_{x,y}(t) = f_{x,t}(0) - f_{y,t}(0) with two parameter derivatives.
DeltaJet delta_jet(const ParametricFamily& fam, const Coding& x, const Coding& y, double t);

}  // namespace dyadlab
