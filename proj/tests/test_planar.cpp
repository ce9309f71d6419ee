#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "dyadlab/entropy.hpp"
#include "dyadlab/error.hpp"
#include "dyadlab/planar.hpp"
#include "oracles.hpp"

using namespace dyadlab;

TEST_CASE("four-corner set and its tree") {
  auto f = four_corner_ifs();
  CHECK(f.size() == 4);
  CHECK(f.similarity_dimension() == doctest::Approx(1.0));
  auto t = build_planar_tree(f, 10);
  CHECK(t.scale == 1.0);
  for (int m = 1; m <= 10; ++m) {
    // 4^{ceil(m/2)} cells: each digit pair fixes a 1/4-cell, half steps see the corner.
    CHECK(covering_number(t.measure, m) == (std::size_t{1} << (2 * ((m + 1) / 2))));
    CHECK(shannon_entropy(t.measure, m).entropy_bits == doctest::Approx(2.0 * ((m + 1) / 2)));
  }
  CHECK_THROWS_AS(PlanarIFS({{1.0, {0, 0}}}, {1.0}), Error);
}

TEST_CASE("directions") {
  auto z = Direction::from_pi_fraction(0);
  CHECK(z.exact());
  CHECK(z.unit()[0] == 1.0);
  CHECK(z.unit()[1] == 0.0);
  CHECK(z.project(0.3, 0.7) == 0.3);
  for (auto q : {Rational(1, 7), Rational(1, 5), Rational(1, 3)}) {
    auto a = Direction::from_pi_fraction(q).unit();
    auto b = Direction::from_pi_fraction(Rational(1, 2) - q).unit();
    CHECK(a[0] == b[1]);
    CHECK(a[1] == b[0]);
  }
  auto d = coincidence_direction({0, 0.75}, {0.75, 0});
  CHECK(d.theta() == doctest::Approx(M_PI / 4));
  CHECK(d.project(0, 0.75) == doctest::Approx(d.project(0.75, 0)));
  CHECK_THROWS_WITH_AS(coincidence_direction({0.1, 0.2}, {0.1, 0.2}), "degenerate pair", Error);
  CHECK_THROWS_AS(Direction::from_vector(Rational(0), Rational(0)), Error);
  auto v = Direction::from_vector(Rational(1), Rational(2));
  CHECK(v.theta() == doctest::Approx(std::atan(2.0)));
}

TEST_CASE("projections of the four-corner set") {
  auto f = four_corner_ifs();
  auto p0 = project_ifs(f, Direction::from_pi_fraction(0));
  CHECK(p0.ifs.size() == 2);
  CHECK(p0.merged_maps == 2);
  CHECK(p0.exact_merge);
  CHECK(p0.ifs.similarity_dimension() == doctest::Approx(0.5));

  // At pi/4 the middle translations coincide: three maps, weights 1/4, 1/2, 1/4.
  auto p1 = project_ifs(f, Direction::from_pi_fraction(Rational(1, 4)));
  REQUIRE(p1.ifs.size() == 3);
  CHECK(p1.merged_maps == 1);
  CHECK(p1.ifs.weights()[1] == doctest::Approx(0.5));
  CHECK(p1.ifs.similarity_dimension() == doctest::Approx(0.75));

  // Greedy N_delta at delta = 4^-l counts the disjoint level-l cylinders.
  for (int l = 1; l <= 5; ++l) {
    CHECK(interval_cover_count(p0.ifs, l, std::pow(4.0, -l)) == (std::size_t{1} << l));
    CHECK(interval_cover_count(p1.ifs, l, std::pow(4.0, -l)) == static_cast<std::size_t>(std::pow(3, l)));
  }

  auto rows = direction_scan(
      f, {Direction::from_pi_fraction(0), Direction::from_pi_fraction(Rational(1, 4)), Direction::from_vector(1, 2)},
      10);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].h_over_n == doctest::Approx(0.5));
  CHECK(rows[0].cover_count == 32);
  CHECK(rows[0].merged_map_count == 2);
  CHECK(rows[1].interval_cover == 243);
  CHECK(rows[1].merged_map_count == 3);
  CHECK(std::abs(rows[1].h_over_n - 0.75) < 0.1);
  CHECK(rows[1].h_over_n == doctest::Approx(shannon_entropy(build_tree_measure(p1.ifs, 10).measure, 10).entropy_bits / 10));
  // Slope 2 tiles an interval: the projection is Lebesgue.
  CHECK(rows[2].merged_map_count == 4);
  CHECK(rows[2].h_over_n > 0.999);
  CHECK(rows[2].cover_count == 1024);
}

TEST_CASE("projected trees and fibres") {
  auto t = build_planar_tree(four_corner_ifs(), 10);
  auto pt = project_tree(t.measure, Direction::from_pi_fraction(0));
  // Independent: project the leaf centres by hand.
  std::map<std::uint64_t, double> bins;
  for (auto& c : t.measure.level(10)) {
    std::uint32_t x = 0, y = 0;
    deinterleave2(c.key, x, y);
    bins[x] += c.mass;
  }
  CHECK(shannon_entropy(pt, 10).entropy_bits == doctest::Approx(oracle::entropy_of(bins)));
  CHECK(shannon_entropy(pt, 10).entropy_bits == doctest::Approx(5.0));

  auto fib = strip_conditional(t.measure, Direction::from_pi_fraction(0), 0.0, 2);
  CHECK(fib.total_mass() == doctest::Approx(1.0));
  CHECK(shannon_entropy(fib, 10).entropy_bits == doctest::Approx(5.0));
  CHECK_THROWS_WITH_AS(strip_conditional(t.measure, Direction::from_pi_fraction(0), 0.5, 3), "empty component",
                       Error);
}

TEST_CASE("Assouad estimates") {
  auto t = build_planar_tree(four_corner_ifs(), 10);
  auto a = assouad_estimate(t.measure, 2, 8);
  CHECK(a.estimate == doctest::Approx(1.0));
  CHECK(a.ratios.size() == 4);
  auto pa = assouad_estimate(project_tree(t.measure, Direction::from_pi_fraction(0)), 2, 8);
  CHECK(pa.estimate == doctest::Approx(0.5));
  for (auto& [cell, r] : pa.ratios) CHECK(r <= pa.estimate);
  CHECK_THROWS_AS(assouad_estimate(t.measure, 4, 8), Error);
}
