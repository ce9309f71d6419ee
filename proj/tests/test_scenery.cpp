#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dyadlab/entropy.hpp"
#include "dyadlab/error.hpp"
#include "dyadlab/scenery.hpp"
#include "oracles.hpp"

using namespace dyadlab;

namespace {

TreeMeasure digit03(int depth) {
  const std::vector<double> w{0.5, 0.0, 0.0, 0.5};
  return TreeMeasure::digit_measure(1, 2, w, depth);
}

}  // namespace

TEST_CASE("magnification of a fixed tree") {
  auto src = MeasureSource::fixed(TreeMeasure::bernoulli(0.3, 10), "bernoulli");
  CHECK(!src->replenishable());
  auto s = make_state(src, {0.7});
  auto m = magnify(s);
  CHECK(m.point[0] == doctest::Approx(0.4));
  CHECK(m.remaining_depth == 9);
  CHECK(m.measure.mass(1, 0) == doctest::Approx(0.3));
  CHECK(m.measure.mass(1, 1) == doctest::Approx(0.7));
  CHECK(m.measure.total_mass() == doctest::Approx(1.0));

  // Magnifying into the zero-mass half of a digit measure is rejected up front.
  auto d = MeasureSource::fixed(digit03(8));
  CHECK_THROWS_AS(make_state(d, {0.3}), Error);
  auto ok = make_state(d, {0.2});  // base-4 digits 0303...
  for (int i = 0; i < 8; ++i) ok = magnify(ok);
  CHECK(ok.remaining_depth == 0);
  CHECK_THROWS_WITH_AS(magnify(ok), "exhausted budget", Error);
}

TEST_CASE("replenishable sources never run out") {
  auto src = MeasureSource::digit(1, 2, {0.5, 0.0, 0.0, 0.5}, 12);
  CHECK(src->replenishable());
  auto s = make_state(src, {0.0});
  for (int i = 0; i < 100; ++i) s = magnify(s);
  CHECK(s.measure.max_depth() == 12);
  CHECK(s.measure.mass(1, 0) == doctest::Approx(0.5));
  // Every served window is an exact component of the same measure.
  auto deep = digit03(14);
  for (int phase = 0; phase < 2; ++phase) {
    const auto& w = src->window(phase, 0);
    CHECK(shannon_entropy(w, 12).entropy_bits ==
          doctest::Approx(component_entropy(deep, phase, 0, 12)).epsilon(1e-12));
  }
}

TEST_CASE("Cesaro means of the scenery flow") {
  for (double p : {0.5, 0.25, 0.3}) {
    auto s = scenery_orbit(MeasureSource::bernoulli(p, 16), std::nullopt, 200, 8, 3);
    CHECK(s.values.size() == 200);
    CHECK(s.digits.size() == 200);
    for (double v : s.values) CHECK(v == doctest::Approx(oracle::binary_entropy(p)).epsilon(1e-12));
    CHECK(s.mean() == doctest::Approx(oracle::binary_entropy(p)).epsilon(1e-12));
  }
  // Base-4 digits {0, 3}: every component carries l/2 bits at scale l (l even).
  auto d = scenery_orbit(MeasureSource::digit(1, 2, {0.5, 0.0, 0.0, 0.5}, 16), std::nullopt, 301, 8, 7);
  CHECK(d.mean() == doctest::Approx(0.5).epsilon(1e-12));
  for (auto digit : d.digits) CHECK(digit <= 1);

  auto runs = scenery_orbits(MeasureSource::lebesgue(2, 8), 3, 50, 4, 1);
  REQUIRE(runs.size() == 3);
  CHECK(pooled_mean(runs) == doctest::Approx(2.0));
  auto rev = runs;
  std::reverse(rev.begin(), rev.end());
  CHECK(pooled_mean(rev) == pooled_mean(runs));

  // Seeded orbits are reproducible; an explicit point follows its own digits.
  auto a = scenery_orbit(MeasureSource::bernoulli(0.3, 16), std::nullopt, 40, 4, 11);
  auto b = scenery_orbit(MeasureSource::bernoulli(0.3, 16), std::nullopt, 40, 4, 11);
  CHECK(a.digits == b.digits);
  auto x = scenery_orbit(MeasureSource::fixed(TreeMeasure::bernoulli(0.3, 24)), std::vector<double>{0.75}, 10, 4);
  CHECK(x.digits == std::vector<std::uint32_t>{1, 1, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(scenery_orbit(MeasureSource::fixed(TreeMeasure::bernoulli(0.3, 12)), std::nullopt, 10, 4),
                  Error);
}

TEST_CASE("uniform entropy statistic") {
  auto leb = TreeMeasure::uniform(1, 18);
  auto all = uniform_entropy_statistic(leb, 12, 6, 0.1, 1.0);
  CHECK(all.exhaustive);
  CHECK(all.points == 4096);
  CHECK(all.fraction == doctest::Approx(1.0));
  CHECK(uniform_entropy_statistic(leb, 12, 6, 0.1, 0.5).fraction == 0.0);
  const double x = 0.3;
  CHECK(uniform_entropy_statistic(TreeMeasure::dirac(std::span<const double>(&x, 1), 18), 12, 6, 0.1, 0.0).fraction ==
        doctest::Approx(1.0));
  auto mc = uniform_entropy_statistic(leb, 12, 6, 0.1, 1.0, 500, 5);
  CHECK(!mc.exhaustive);
  CHECK(mc.points == 500);
  CHECK(mc.fraction == 1.0);

  // Half Lebesgue on [0, 1/2), half an atom: only the Lebesgue half is good.
  const int depth = 18;
  std::vector<CellMass> leaves;
  const std::uint64_t half = std::uint64_t{1} << (depth - 1);
  for (std::uint64_t k = 0; k < half; ++k) leaves.push_back({k, std::ldexp(1.0, -depth)});
  leaves.push_back({3 * (half >> 1), 0.5});
  auto mixed = TreeMeasure::from_leaves(1, depth, std::move(leaves));
  CHECK(uniform_entropy_statistic(mixed, 12, 6, 0.1, 1.0).fraction == doctest::Approx(0.5));
}

TEST_CASE("spreading") {
  auto t = default_translations();
  REQUIRE(t.size() == 17);
  CHECK(t[0] == 0.0);
  CHECK(t[1] == doctest::Approx((std::sqrt(5.0) - 1) / 2));

  auto leb = spreading_check(TreeMeasure::uniform(1, 19), 16, 3, 0.1);
  CHECK(leb.spreading);
  CHECK(leb.good_mass == doctest::Approx(1.0));
  const double x = 0.3;
  auto dirac = spreading_check(TreeMeasure::dirac(std::span<const double>(&x, 1), 19), 16, 3, 0.1);
  CHECK(!dirac.spreading);
  CHECK(dirac.good_mass == 0.0);
  CHECK(dirac.candidate_good_mass.size() == 17);

  // Digits {0, 3}: a 3-step refinement loses a factor 4 from even scales and
  // only 2 from odd ones, so exactly half the scales are bad everywhere.
  auto d = spreading_check(digit03(19), 16, 3, 0.1, {0.0});
  CHECK(!d.spreading);
  CHECK(d.good_mass == 0.0);
  double mass = 0;
  for (auto& p : d.points) {
    CHECK(p.bad_fraction == doctest::Approx(0.5));
    mass += p.mass;
  }
  CHECK(mass == doctest::Approx(1.0));
  // With l = 1 the non-strict inequality makes every scale bad, even for Lebesgue.
  CHECK(spreading_check(TreeMeasure::uniform(1, 17), 16, 1, 0.1).good_mass == 0.0);
}
