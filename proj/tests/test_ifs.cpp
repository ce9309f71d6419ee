#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "dyadlab/entropy.hpp"
#include "dyadlab/error.hpp"
#include "dyadlab/ifs.hpp"
#include "dyadlab/ifs_file.hpp"
#include "dyadlab/overlaps.hpp"
#include "dyadlab/parametric.hpp"
#include "dyadlab/transversality.hpp"
#include "oracles.hpp"

using namespace dyadlab;

namespace {

WeightedIFS middle_thirds() { return WeightedIFS::uniform({{1.0 / 3, 0.0}, {1.0 / 3, 2.0 / 3}}); }

// All words of length <= max_len satisfying |r_I| <= 2^-k < |r_{I-}|, by brute force.
std::set<std::string> brute_stopping(const WeightedIFS& ifs, int k, int max_len) {
  std::set<std::string> out;
  const double thr = std::ldexp(1.0, -k);
  std::function<void(std::string, double)> rec = [&](std::string w, double r) {
    if (std::abs(r) <= thr) {
      out.insert(w);
      return;
    }
    if (static_cast<int>(w.size()) == max_len) return;
    for (std::size_t i = 0; i < ifs.size(); ++i) rec(w + static_cast<char>('0' + i), r * ifs.maps()[i].r);
  };
  rec("", 1.0);
  return out;
}

std::string read_fixture(const std::string& name) {
  std::ifstream in(std::string(DYADLAB_FIXTURES) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("similarity dimension closed forms") {
  CHECK(WeightedIFS::uniform({{0.5, 0}, {0.5, 1}}).similarity_dimension() == doctest::Approx(1.0));
  CHECK(middle_thirds().similarity_dimension() == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-14));
  WeightedIFS w({{0.5, 0}, {0.5, 0.5}}, {0.25, 0.75});
  CHECK(w.similarity_dimension() == doctest::Approx(oracle::binary_entropy(0.25)).epsilon(1e-14));
  CHECK(w.similarity_dimension() == doctest::Approx(0.811278).epsilon(1e-6));
}

TEST_CASE("WeightedIFS validation") {
  CHECK_THROWS_WITH_AS(WeightedIFS({{1.0, 0}}, {1.0}), "map 0 is not a contraction", Error);
  CHECK_THROWS_WITH_AS(WeightedIFS({{0.0, 0}}, {1.0}), "map 0 is not a contraction", Error);
  CHECK_THROWS_WITH_AS(WeightedIFS({{0.5, 0}, {0.5, 1}}, {0.5, 0.4}), "weights must sum to 1", Error);
  CHECK_THROWS_WITH_AS(WeightedIFS({{0.5, 0}, {0.5, 1}}, {1.0, 0.0}), "weights must be positive", Error);
  CHECK_THROWS_AS(WeightedIFS({}, {}), Error);
  auto h = WeightedIFS::uniform({{-0.5, 1.0}, {0.25, 0.0}}).hull();
  CHECK(h.first == doctest::Approx(0.0));
  CHECK(h.second == doctest::Approx(1.0));
}

TEST_CASE("stopping words") {
  auto dy = WeightedIFS::uniform({{0.5, 0}, {0.5, 0.5}});
  CHECK(stopping_words(dy, 5).size() == 32);
  auto two = WeightedIFS::uniform({{0.5, 0}, {0.25, 0.5}});
  auto w = stopping_words(two, 2);
  REQUIRE(w.size() == 3);
  CHECK(word_string(w[0].symbols, 2) == "00");
  CHECK(word_string(w[1].symbols, 2) == "01");
  CHECK(word_string(w[2].symbols, 2) == "1");
  double total = 0;
  for (auto& x : w) total += x.p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937_64 g(8);
  for (int it = 0; it < 25; ++it) {
    std::vector<AffineContraction> maps;
    const int a = 2 + it % 3;
    for (int i = 0; i < a; ++i) maps.push_back({(0.2 + 0.6 * oracle::uniform01(g)) * (g() % 4 == 0 ? -1 : 1), 1.0 * i});
    auto ifs = WeightedIFS::uniform(maps);
    const int k = 1 + it % 6;
    auto words = stopping_words(ifs, k);
    std::set<std::string> got;
    double kraft = 0;
    double min_r = 1;
    for (auto& m : maps) min_r = std::min(min_r, std::abs(m.r));
    for (auto& x : words) {
      got.insert(word_string(x.symbols, ifs.size()));
      kraft += x.p;
      CHECK(std::abs(x.r) <= std::ldexp(1.0, -k));
      CHECK(std::abs(x.r) > std::ldexp(1.0, -k) * min_r);
    }
    CHECK(got == brute_stopping(ifs, k, 40));
    CHECK(kraft == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(count_stopping_words(ifs, k) == words.size());
    // prefix-free
    for (auto it2 = got.begin(); it2 != got.end(); ++it2) {
      auto nx = std::next(it2);
      if (nx != got.end()) CHECK(nx->rfind(*it2, 0) != 0);
    }
  }
}

TEST_CASE("word maps compose left to right") {
  auto ifs = WeightedIFS({{0.5, 0.1}, {-0.25, 0.7}}, {0.4, 0.6});
  auto words = stopping_words(ifs, 4);
  for (auto& w : words) {
    double x = 0.3;
    for (auto it = w.symbols.rbegin(); it != w.symbols.rend(); ++it) x = ifs.maps()[*it](x);
    CHECK(w.apply(0.3) == doctest::Approx(x).epsilon(1e-14));
    double p = 1;
    for (auto s : w.symbols) p *= ifs.weights()[s];
    CHECK(w.p == doctest::Approx(p));
  }
}

TEST_CASE("tree measure of self-similar measures") {
  auto leb = build_tree_measure(WeightedIFS::uniform({{0.5, 0}, {0.5, 0.5}}), 10);
  REQUIRE(leb.measure.support_size(10) == 1024);
  for (auto& c : leb.measure.level(10)) CHECK(c.mass == std::ldexp(1.0, -10));

  auto c = middle_thirds();
  CHECK(build_tree_measure(c, 2).measure.mass(1, 0) == 0.5);
  double prev = 1;
  for (int g : {6, 8, 12}) {
    BuildOptions o;
    o.guard = g;
    const double a = build_tree_measure(c, 2, o).measure.mass(2, 0);
    CHECK(std::abs(a - 1.0 / 3.0) < prev);
    prev = std::abs(a - 1.0 / 3.0);
  }
  CHECK(prev < 1e-3);

  // Serial and parallel builds agree bit for bit.
  auto bc = WeightedIFS::uniform({{0.6, 0}, {0.6, 1}});
  auto par = build_tree_measure(bc, 12);
  auto ser = build_tree_measure_serial(bc, 12);
  REQUIRE(par.measure.support_size(12) == ser.measure.support_size(12));
  for (std::size_t i = 0; i < par.measure.level(12).size(); ++i) {
    CHECK(par.measure.level(12)[i].key == ser.measure.level(12)[i].key);
    CHECK(par.measure.level(12)[i].mass == ser.measure.level(12)[i].mass);
  }
  BuildOptions tiny;
  tiny.budget = 100;
  CHECK_THROWS_WITH_AS(build_tree_measure(bc, 12, tiny), "budget exceeded", Error);
}

TEST_CASE("middle-thirds entropy matches an independent ternary enumeration") {
  // Atoms sum_i d_i 3^-i, d_i in {0,2}, 14 digits (= Lambda_22 at guard 6),
  // binned with integer arithmetic.
  const int k = 14, n = 16;
  std::uint64_t pow3 = 1;
  for (int i = 0; i < k; ++i) pow3 *= 3;
  std::map<std::uint64_t, double> cells;
  for (std::uint32_t w = 0; w < (1U << k); ++w) {
    std::uint64_t num = 0;
    for (int i = k - 1; i >= 0; --i) num = num * 3 + 2 * ((w >> i) & 1U);
    cells[(static_cast<unsigned __int128>(num) << n) / pow3] += std::ldexp(1.0, -k);
  }
  const double oracle_h = oracle::entropy_of(cells);
  auto t = build_tree_measure(middle_thirds(), n);
  CHECK(t.words == (1U << k));
  CHECK(shannon_entropy(t.measure, n).entropy_bits == doctest::Approx(oracle_h).epsilon(1e-12));
  // Frozen from the enumeration above; the O(1) excess over n log2/log3 is
  // about 0.83 bits at this depth.
  CHECK(oracle_h / n == doctest::Approx(0.682944176805).epsilon(1e-11));
}

TEST_CASE("tree measure is an approximate fixed point of the IFS operator") {
  auto c = middle_thirds();
  auto t = build_tree_measure(c, 12);
  auto nu = apply_ifs_operator(t, c);
  double l1 = 0;
  for (auto& cm : t.measure.level(12)) l1 += std::abs(cm.mass - nu.mass(12, cm.key));
  for (auto& cm : nu.level(12))
    if (t.measure.mass(12, cm.key) == 0) l1 += cm.mass;
  CHECK(l1 < 0.01);
  CHECK(std::abs(shannon_entropy(nu, 12).entropy_bits - shannon_entropy(t.measure, 12).entropy_bits) < 0.01);
}

TEST_CASE("codings") {
  auto x = Coding::parse("100");
  CHECK(x.to_string() == "100(0)");
  CHECK(Coding::parse("1(01)").at(4) == 1);
  CHECK(Coding::parse("1(01)").at(5) == 0);
  CHECK(coding_distance(Coding::parse("100"), Coding::parse("011")) == 1.0);
  CHECK(coding_distance(Coding::parse("0100"), Coding::parse("0110")) == 0.25);
  CHECK(coding_distance(Coding::parse("1(0)"), Coding::parse("10(0)")) == 0.0);
  CHECK_THROWS_WITH_AS(Coding::parse("1()"), "period length 0", Error);
  CHECK_THROWS_AS(Coding::parse("1(0"), Error);
}

TEST_CASE("delta jet of the Bernoulli-convolution family") {
  auto fam = ParametricFamily::bernoulli_convolution(0.5, 0.8);
  auto x = Coding::parse("100"), y = Coding::parse("011");
  auto d = delta_jet(fam, x, y, 0.5);
  CHECK(d.delta == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(d.d1 == doctest::Approx(-2.0).epsilon(1e-15));
  CHECK(d.d2 == doctest::Approx(-2.0).epsilon(1e-15));
  const double g = (std::sqrt(5.0) - 1) / 2;
  auto dg = delta_jet(fam, x, y, g);
  CHECK(std::abs(dg.delta) < 1e-15);
  CHECK(std::abs(std::abs(dg.d1) - std::sqrt(5.0)) < 1e-12);
  auto same = delta_jet(fam, x, x, 0.6);
  CHECK(same.delta == 0.0);
  CHECK(same.d1 == 0.0);
  CHECK(same.d2 == 0.0);

  // Doubling every translation doubles Delta.
  std::vector<ParametricMap> maps;
  for (int i = 0; i < 2; ++i)
    maps.push_back({Polynomial(std::vector<Rational>{0, 1}), Polynomial(std::vector<Rational>{Rational(2 * i)})});
  auto fam2 = ParametricFamily::polynomial(maps, {0.5, 0.5}, 0.5, 0.8);
  for (double t : {0.55, 0.6, 0.7}) {
    const auto a = delta_jet(fam, Coding::parse("1(01)"), Coding::parse("0(110)"), t);
    const auto b = delta_jet(fam2, Coding::parse("1(01)"), Coding::parse("0(110)"), t);
    CHECK(b.delta == doctest::Approx(2 * a.delta).epsilon(1e-13));
    CHECK(b.d1 == doctest::Approx(2 * a.d1).epsilon(1e-13));
  }

  // Callable family: finite differences agree with the closed form.
  auto cf = ParametricFamily::callable(
      2, [](double t) { return std::vector<AffineContraction>{{t, 0.0}, {t, 1.0}}; }, {0.5, 0.5}, 0.5, 0.8);
  const auto c = delta_jet(cf, x, y, 0.6);
  const auto e = delta_jet(fam, x, y, 0.6);
  CHECK(c.delta == doctest::Approx(e.delta).epsilon(1e-13));
  CHECK(std::abs(c.d1 - e.d1) < 1e-7);
  CHECK(std::abs(c.d2 - e.d2) < 1e-3);
  CHECK(c.truncation_error >= 0.0);
  CHECK(e.truncation_error == 0.0);
}

TEST_CASE("exact overlap search") {
  auto golden = golden_ratio_conjugate();
  CHECK(golden * golden + golden == QuadraticNumber(1));
  auto fam = ParametricFamily::bernoulli_convolution(0.5, 0.8);
  auto pairs = exact_overlap_search(fam, golden, 3);
  bool found = false;
  for (auto& p : pairs) found = found || (p.first == "100" && p.second == "011") || (p.first == "011" && p.second == "100");
  CHECK(found);
  CHECK(exact_overlap_search(fam, QuadraticNumber(Rational(1, 3)), 6).empty());

  std::vector<ParametricMap> dy;
  for (int i = 0; i < 2; ++i)
    dy.push_back({Polynomial(std::vector<Rational>{Rational(1, 2)}), Polynomial(std::vector<Rational>{Rational(i, 2)})});
  auto dfam = ParametricFamily::polynomial(dy, {0.5, 0.5}, 0.0, 1.0);
  CHECK(exact_overlap_search(dfam, QuadraticNumber(0), 6).empty());

  std::vector<ParametricMap> inexact{{Polynomial(std::vector<double>{0.0, 1.0}), Polynomial::constant(0.0)},
                                     {Polynomial(std::vector<double>{0.0, 1.0}), Polynomial::constant(1.0)}};
  auto ifam = ParametricFamily::polynomial(inexact, {0.5, 0.5}, 0.5, 0.8);
  CHECK_THROWS_WITH_AS(exact_overlap_search(ifam, golden, 3), "exact arithmetic required", Error);
}

TEST_CASE("exact rationals parse in base ten") {
  CHECK(parse_rational("0.50") == Rational(1, 2));
  CHECK(parse_rational("007/010") == Rational(7, 10));
  CHECK(parse_rational("-0.125") == Rational(-1, 8));
  CHECK(parse_rational(" 3 ") == Rational(3));
  CHECK_THROWS_AS(parse_rational("0x10"), Error);
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("abc"), Error);
}

TEST_CASE("transversality audit") {
  auto fam = ParametricFamily::bernoulli_convolution(0.5, 0.6);
  TransversalityOptions o;
  o.depth = 6;
  auto rep = transversality_audit(fam, 0.5, 0.6, uniform_grid(0.5, 0.6, 21), o);
  CHECK(rep.violation_count == 0);
  CHECK(rep.pairs_audited > 0);
  std::uint64_t total = 0;
  for (auto& s : rep.strata) total += s.pairs_audited;
  CHECK(total == rep.pairs_audited);

  // An absurd constant forces violations, and each one satisfies the definition.
  o.c_beta = 10.0;
  auto bad = transversality_audit(fam, 0.5, 0.6, uniform_grid(0.5, 0.6, 5), o);
  CHECK(bad.violation_count > 0);
  for (auto& v : bad.violations) {
    const double d = coding_distance(Coding::parse(v.x), Coding::parse(v.y));
    CHECK(std::abs(v.delta) <= 10.0 * d);
    CHECK(std::abs(v.d1) < 10.0 * d);
    auto j = delta_jet(fam, Coding::parse(v.x), Coding::parse(v.y), v.t);
    CHECK(j.delta == doctest::Approx(v.delta));
  }
  CHECK_THROWS_AS(grid_from_step(0.5, 0.6, 0.5), Error);
  CHECK(grid_from_step(0.5, 0.6, 0.01).size() == 11);
}

TEST_CASE("IFS description files") {
  auto d = parse_ifs_description(read_fixture("bernoulli_golden.ifs.json"));
  CHECK(d.parametric);
  CHECK(d.family.exact());
  REQUIRE(d.exact_value.has_value());
  CHECK(*d.exact_value == golden_ratio_conjugate());
  auto ifs = d.resolve();
  CHECK(ifs.maps()[1].s == 1.0);
  CHECK(ifs.maps()[0].r == doctest::Approx((std::sqrt(5.0) - 1) / 2));
  CHECK(!exact_overlap_search(d.family, *d.exact_value, 3).empty());

  auto c = parse_ifs_description(R"({"maps":[{"r":"1/3","s":0},{"r":"1/3","s":"2/3"}]})");
  CHECK(!c.parametric);
  CHECK(c.resolve().similarity_dimension() == doctest::Approx(std::log(2.0) / std::log(3.0)));
  CHECK(c.family.polynomials()[1].s.exact_coefficients()[0] == Rational(2, 3));

  auto dec = parse_ifs_description(R"({"maps":[{"r":0.1,"s":0},{"r":0.1,"s":0.9}]})");
  CHECK(dec.family.polynomials()[0].r.exact_coefficients()[0] == Rational(1, 10));

  CHECK_THROWS_WITH_AS(parse_ifs_description(R"({"maps":[{"r":1.0,"s":0}]})", "f.json"),
                       "f.json: field 'maps[0].r': |r| must lie in (0, 1); r(0) = 1", Error);
  CHECK_THROWS_WITH_AS(
      parse_ifs_description(R"({"maps":[{"r":[0,1],"s":0},{"r":[0,1],"s":1}],"parameter":{"lo":0.5,"hi":1.2}})", "f"),
      doctest::Contains("f: field 'maps[0].r': |r| must lie in (0, 1); r(1.00039)"), Error);
  CHECK_THROWS_WITH_AS(parse_ifs_description(R"({"maps":[{"r":[0,1],"s":0}]})", "f"),
                       "f: field 'parameter': missing; required when a coefficient depends on t", Error);
  CHECK_THROWS_WITH_AS(parse_ifs_description(R"({"maps":[{"r":0.5,"s":0},{"r":0.5,"s":1}],"weights":[0.5,0.6]})", "f"),
                       "f: field 'weights': must sum to 1", Error);
  CHECK_THROWS_WITH_AS(parse_ifs_description(R"({"maps":[{"r":0.5,"q":0}]})", "f"), "f: field 'maps[0].q': unknown field",
                       Error);
  CHECK_THROWS_WITH_AS(parse_ifs_description("{\n  \"maps\": [\n    {\"r\": 0.5,, }\n  ]\n}", "f"),
                       doctest::Contains("f:3:15: syntax error"), Error);
  CHECK_THROWS_WITH_AS(parse_ifs_description(R"({"alphabet":3,"maps":[{"r":0.5,"s":0}]})", "f"),
                       "f: field 'alphabet': does not match the number of maps", Error);
  CHECK(!ifs_description_schema().empty());
}
