#include "dyadlab/parametric.hpp"

#include <algorithm>
#include <cmath>

namespace dyadlab {

// ---- Polynomial ------------------------------------------------------------

Polynomial::Polynomial(std::vector<Rational> exact) : exact_(std::move(exact)) {
  c_.reserve(exact_->size());
  for (const auto& q : *exact_) c_.push_back(static_cast<double>(q));
}

const std::vector<Rational>& Polynomial::exact_coefficients() const {
  if (!exact_) throw Error("exact arithmetic required");
  return *exact_;
}

double Polynomial::operator()(double t) const {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + *it;
  return acc;
}

Jet2 Polynomial::operator()(Jet2 t) const {
  Jet2 acc = Jet2::constant(0.0);
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + Jet2::constant(*it);
  return acc;
}

BigFloat Polynomial::operator()(const BigFloat& t) const {
  BigFloat acc = 0;
  if (exact_) {
    for (auto it = exact_->rbegin(); it != exact_->rend(); ++it) {
      acc = acc * t + BigFloat(numerator(*it)) / BigFloat(denominator(*it));
    }
  } else {
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * t + BigFloat(*it);
  }
  return acc;
}

QuadraticNumber Polynomial::operator()(const QuadraticNumber& t) const {
  const auto& q = exact_coefficients();
  QuadraticNumber acc(0L);
  for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * t + QuadraticNumber(*it);
  return acc;
}

namespace {

template <class T>
std::vector<T> add_coeffs(const std::vector<T>& a, const std::vector<T>& b, int sign) {
  std::vector<T> out(std::max(a.size(), b.size()), T(0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += sign > 0 ? b[i] : T(-b[i]);
  return out;
}

template <class T>
std::vector<T> mul_coeffs(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<T> out(a.size() + b.size() - 1, T(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

template <class T>
void trim(std::vector<T>& v) {
  while (!v.empty() && v.back() == T(0)) v.pop_back();
}

Polynomial combine(const Polynomial& a, const Polynomial& b, int op) {
  if (a.exact() && b.exact()) {
    auto e = op == 0 ? mul_coeffs(a.exact_coefficients(), b.exact_coefficients())
                     : add_coeffs(a.exact_coefficients(), b.exact_coefficients(), op);
    trim(e);
    return Polynomial(std::move(e));
  }
  auto c = op == 0 ? mul_coeffs(a.coefficients(), b.coefficients())
                   : add_coeffs(a.coefficients(), b.coefficients(), op);
  trim(c);
  return Polynomial(std::move(c));
}

}  // namespace

Polynomial operator+(const Polynomial& a, const Polynomial& b) { return combine(a, b, +1); }
Polynomial operator-(const Polynomial& a, const Polynomial& b) { return combine(a, b, -1); }
Polynomial operator*(const Polynomial& a, const Polynomial& b) { return combine(a, b, 0); }

bool Polynomial::is_zero() const {
  if (exact_) return std::all_of(exact_->begin(), exact_->end(), [](const Rational& q) { return q == 0; });
  return std::all_of(c_.begin(), c_.end(), [](double v) { return v == 0.0; });
}

bool Polynomial::operator==(const Polynomial& o) const { return (*this - o).is_zero(); }

// ---- ParametricFamily ------------------------------------------------------

namespace {

void check_weights(const std::vector<double>& w, std::size_t n) {
  if (w.size() != n) throw Error("weights size mismatch");
  double total = 0.0;
  for (double p : w) {
    if (!(p > 0.0)) throw Error("weights must be positive");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("weights must sum to 1");
}

}  // namespace

ParametricFamily ParametricFamily::polynomial(std::vector<ParametricMap> maps, std::vector<double> weights,
                                              double lo, double hi) {
  if (maps.empty()) throw Error("empty IFS");
  if (!(lo <= hi)) throw Error("empty parameter interval");
  check_weights(weights, maps.size());
  ParametricFamily f;
  f.alphabet_ = maps.size();
  f.poly_ = std::move(maps);
  f.weights_ = std::move(weights);
  f.lo_ = lo;
  f.hi_ = hi;
  return f;
}

ParametricFamily ParametricFamily::callable(std::size_t alphabet, Callable fn, std::vector<double> weights,
                                            double lo, double hi, double h) {
  if (alphabet == 0) throw Error("empty IFS");
  if (!(lo <= hi)) throw Error("empty parameter interval");
  if (!(h > 0.0)) throw Error("difference step must be positive");
  check_weights(weights, alphabet);
  ParametricFamily f;
  f.alphabet_ = alphabet;
  f.callable_ = std::move(fn);
  f.weights_ = std::move(weights);
  f.lo_ = lo;
  f.hi_ = hi;
  f.h_ = h;
  return f;
}

ParametricFamily ParametricFamily::bernoulli_convolution(double lo, double hi) {
  std::vector<ParametricMap> maps;
  for (int i = 0; i < 2; ++i) {
    maps.push_back(ParametricMap{Polynomial(std::vector<Rational>{0, 1}),
                                 Polynomial(std::vector<Rational>{Rational(i)})});
  }
  return polynomial(std::move(maps), {0.5, 0.5}, lo, hi);
}

bool ParametricFamily::exact() const {
  if (callable_) return false;
  return std::all_of(poly_.begin(), poly_.end(), [](const ParametricMap& m) { return m.r.exact() && m.s.exact(); });
}

const std::vector<ParametricMap>& ParametricFamily::polynomials() const {
  if (callable_) throw Error("family is not polynomial");
  return poly_;
}

std::vector<AffineContraction> ParametricFamily::maps_at(double t) const {
  if (callable_) {
    auto m = callable_(t);
    if (m.size() != alphabet_) throw Error("callable returned wrong alphabet size");
    return m;
  }
  std::vector<AffineContraction> out;
  out.reserve(poly_.size());
  for (const auto& m : poly_) out.push_back(AffineContraction{m.r(t), m.s(t)});
  return out;
}

WeightedIFS ParametricFamily::at(double t) const { return WeightedIFS(maps_at(t), weights_); }

WeightedIFS ParametricFamily::at(double t, const std::vector<double>& weights) const {
  return WeightedIFS(maps_at(t), weights);
}

std::vector<MapJet> ParametricFamily::jets(double t, double* trunc) const {
  std::vector<MapJet> out(alphabet_);
  if (!callable_) {
    const Jet2 x = Jet2::variable(t);
    for (std::size_t i = 0; i < alphabet_; ++i) out[i] = MapJet{poly_[i].r(x), poly_[i].s(x)};
    if (trunc) *trunc = 0.0;
    return out;
  }
  // First derivative: central differences at h and h/2, Richardson-combined.
  // Second derivative: same scheme at sqrt(h), where roundoff stays below the
  // truncation term.
  const double h = h_;
  const double k = std::sqrt(h_);
  const auto f0 = maps_at(t);
  const auto fp = maps_at(t + h), fm = maps_at(t - h);
  const auto fp2 = maps_at(t + h / 2), fm2 = maps_at(t - h / 2);
  const auto gp = maps_at(t + k), gm = maps_at(t - k);
  const auto gp2 = maps_at(t + k / 2), gm2 = maps_at(t - k / 2);
  double err = 0.0;
  auto d1 = [&](double a, double b, double a2, double b2) {
    const double dh = (a - b) / (2 * h);
    const double dh2 = (a2 - b2) / h;
    err = std::max(err, std::abs(dh2 - dh) / 3.0);
    return (4.0 * dh2 - dh) / 3.0;
  };
  auto d2 = [&](double a, double c, double b, double a2, double b2) {
    const double sk = (a - 2 * c + b) / (k * k);
    const double sk2 = (a2 - 2 * c + b2) / (k * k / 4);
    err = std::max(err, std::abs(sk2 - sk) / 3.0);
    return (4.0 * sk2 - sk) / 3.0;
  };
  for (std::size_t i = 0; i < alphabet_; ++i) {
    out[i].r = Jet2{f0[i].r, d1(fp[i].r, fm[i].r, fp2[i].r, fm2[i].r),
                    d2(gp[i].r, f0[i].r, gm[i].r, gp2[i].r, gm2[i].r)};
    out[i].s = Jet2{f0[i].s, d1(fp[i].s, fm[i].s, fp2[i].s, fm2[i].s),
                    d2(gp[i].s, f0[i].s, gm[i].s, gp2[i].s, gm2[i].s)};
  }
  if (trunc) *trunc = err;
  return out;
}

std::vector<MapCoeffs<BigFloat>> ParametricFamily::coefficients(const BigFloat& t) const {
  if (callable_) throw Error("high precision requires a polynomial family");
  std::vector<MapCoeffs<BigFloat>> out;
  out.reserve(poly_.size());
  for (const auto& m : poly_) out.push_back({m.r(t), m.s(t)});
  return out;
}

std::vector<MapCoeffs<QuadraticNumber>> ParametricFamily::exact_coefficients(const QuadraticNumber& t) const {
  if (!exact()) throw Error("exact arithmetic required");
  std::vector<MapCoeffs<QuadraticNumber>> out;
  out.reserve(poly_.size());
  for (const auto& m : poly_) out.push_back({m.r(t), m.s(t)});
  return out;
}

double ParametricFamily::derivative_bound(int samples) const {
  if (samples < 2) samples = 2;
  double c = 0.0;
  for (int j = 0; j < samples; ++j) {
    const double t = lo_ + (hi_ - lo_) * j / (samples - 1);
    for (const auto& m : jets(t)) {
      c = std::max({c, std::abs(m.r.v), std::abs(m.r.d1), std::abs(m.r.d2), std::abs(m.s.v),
                    std::abs(m.s.d1), std::abs(m.s.d2)});
    }
  }
  return c;
}

// ---- Codings -----------------------------------------------------------------

Coding Coding::parse(const std::string& text) {
  Coding c;
  bool in_period = false, closed = false;
  for (char ch : text) {
    if (closed) throw Error("text after period in coding '" + text + "'");
    if (ch == '(') {
      if (in_period) throw Error("nested period in coding '" + text + "'");
      in_period = true;
    } else if (ch == ')') {
      if (!in_period) throw Error("unbalanced period in coding '" + text + "'");
      closed = true;
    } else if (ch >= '0' && ch <= '9') {
      (in_period ? c.period : c.prefix).push_back(static_cast<std::uint8_t>(ch - '0'));
    } else {
      throw Error("bad symbol in coding '" + text + "'");
    }
  }
  if (in_period && !closed) throw Error("unbalanced period in coding '" + text + "'");
  if (!in_period) c.period = {0};
  if (c.period.empty()) throw Error("period length 0");
  return c;
}

std::string Coding::to_string() const {
  std::string s;
  for (auto i : prefix) s += static_cast<char>('0' + i);
  s += '(';
  for (auto i : period) s += static_cast<char>('0' + i);
  s += ')';
  return s;
}

std::uint8_t Coding::at(std::size_t i) const {
  if (i < prefix.size()) return prefix[i];
  if (period.empty()) throw Error("period length 0");
  return period[(i - prefix.size()) % period.size()];
}

std::optional<std::size_t> common_prefix(const Coding& x, const Coding& y) {
  if (x.period.empty() || y.period.empty()) throw Error("period length 0");
  // Past max prefix, both are periodic; lcm <= product of periods.
  const std::size_t bound = std::max(x.prefix.size(), y.prefix.size()) + x.period.size() * y.period.size();
  for (std::size_t i = 0; i < bound; ++i) {
    if (x.at(i) != y.at(i)) return i;
  }
  return std::nullopt;
}

double coding_distance(const Coding& x, const Coding& y) {
  const auto m = common_prefix(x, y);
  return m ? std::ldexp(1.0, -static_cast<int>(*m)) : 0.0;
}

DeltaJet delta_jet(const ParametricFamily& fam, const Coding& x, const Coding& y, double t) {
  if (x.period.empty() || y.period.empty()) throw Error("period length 0");
  double trunc = 0.0;
  const auto mj = fam.jets(t, &trunc);
  std::vector<MapCoeffs<Jet2>> coeffs;
  coeffs.reserve(mj.size());
  for (const auto& m : mj) coeffs.push_back({m.r, m.s});
  for (auto c : x.prefix) if (c >= coeffs.size()) throw Error("symbol outside alphabet");
  for (auto c : y.prefix) if (c >= coeffs.size()) throw Error("symbol outside alphabet");
  DeltaJet out;
  if (!common_prefix(x, y)) return out;
  const Jet2 d = coding_point(coeffs, x) - coding_point(coeffs, y);
  out.delta = d.v;
  out.d1 = d.d1;
  out.d2 = d.d2;
  out.truncation_error = trunc;
  return out;
}

}  // namespace dyadlab
