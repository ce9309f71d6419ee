#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "dyadlab/additive.hpp"
#include "dyadlab/entropy.hpp"
#include "dyadlab/ifs.hpp"
#include "dyadlab/kernels.hpp"
#include "oracles.hpp"

using namespace dyadlab;

namespace {

struct ThreadGuard {
  ~ThreadGuard() { kernels::set_threads(0); }
};

}  // namespace

TEST_CASE("fixed point mass") {
  using kernels::from_fixed;
  using kernels::to_fixed;
  CHECK(from_fixed(to_fixed(0.5)) == 0.5);
  CHECK(from_fixed(to_fixed(0.0)) == 0.0);
  CHECK(from_fixed(to_fixed(1.0)) == 1.0);
  // Summation order does not matter.
  std::mt19937_64 g(2);
  std::vector<double> m(1000);
  for (auto& x : m) x = oracle::uniform01(g) / 1000;
  kernels::Fixed fwd = 0, rev = 0;
  for (std::size_t i = 0; i < m.size(); ++i) fwd += to_fixed(m[i]);
  for (std::size_t i = m.size(); i-- > 0;) rev += to_fixed(m[i]);
  CHECK(fwd == rev);
}

TEST_CASE("parallel kernels are thread-count invariant and match serial references") {
  ThreadGuard guard;
  std::mt19937_64 g(77);
  std::vector<double> p(50000);
  double total = 0;
  for (auto& x : p) total += (x = oracle::uniform01(g));
  for (auto& x : p) x /= total;
  const double ref = kernels::entropy_bits_serial(std::span<const double>(p));

  auto mu = TreeMeasure::from_leaves(2, 9, oracle::random_leaves(g, 2, 9, 0.6));
  auto ifs = WeightedIFS::uniform({{0.6, 0}, {0.6, 1}, {0.35, 0.4}});
  auto tree_ref = build_tree_measure_serial(ifs, 7);

  GridSet a(10, 1024), b(10, 1024);
  for (std::uint64_t j = 0; j <= 1024; ++j) {
    if (oracle::uniform01(g) < 0.3) a.insert(j);
    if (oracle::uniform01(g) < 0.3) b.insert(j);
  }
  GridSet sa(12, 4096), sb(12, 4096);  // sparse enough for the pair-counting path
  for (std::uint64_t j = 0; j <= 4096; ++j) {
    if (oracle::uniform01(g) < 0.01) sa.insert(j);
    if (oracle::uniform01(g) < 0.02) sb.insert(j);
  }
  std::vector<GridSet> b_map(a.size(), b);
  const auto energy_ref = additive_energy_serial(a, b);
  const auto sparse_ref = additive_energy_serial(sa, sb);
  const auto union_ref = translate_union_set_serial(a, b_map);

  // Serial references sum in a different order, so they agree to rounding;
  // the parallel kernels agree with themselves bit for bit.
  kernels::set_threads(1);
  const double par_ref = kernels::entropy_bits(std::span<const double>(p));
  std::vector<double> h_ref;
  for (int k = 0; k <= 9; ++k) h_ref.push_back(shannon_entropy(mu, k).entropy_bits);
  const auto tree_par = build_tree_measure(ifs, 7);
  CHECK(par_ref == doctest::Approx(ref).epsilon(1e-13));
  for (int k = 0; k <= 9; ++k) CHECK(h_ref[k] == doctest::Approx(shannon_entropy_serial(mu, k)).epsilon(1e-13));
  REQUIRE(tree_par.measure.level(7).size() == tree_ref.measure.level(7).size());
  for (std::size_t i = 0; i < tree_par.measure.level(7).size(); ++i) {
    CHECK(tree_par.measure.level(7)[i].key == tree_ref.measure.level(7)[i].key);
    CHECK(tree_par.measure.level(7)[i].mass == doctest::Approx(tree_ref.measure.level(7)[i].mass).epsilon(1e-13));
  }

  for (int threads : {1, 2, 3, 4, 7}) {
    CAPTURE(threads);
    kernels::set_threads(threads);
    CHECK(kernels::entropy_bits(std::span<const double>(p)) == par_ref);
    for (int k = 0; k <= 9; ++k) CHECK(shannon_entropy(mu, k).entropy_bits == h_ref[k]);
    auto t = build_tree_measure(ifs, 7);
    REQUIRE(t.measure.level(7).size() == tree_par.measure.level(7).size());
    bool same = true;
    for (std::size_t i = 0; i < t.measure.level(7).size(); ++i)
      same = same && t.measure.level(7)[i].key == tree_par.measure.level(7)[i].key &&
             t.measure.level(7)[i].mass == tree_par.measure.level(7)[i].mass;
    CHECK(same);
    CHECK(additive_energy(a, b) == energy_ref);
    CHECK(additive_energy(sa, sb) == sparse_ref);
    CHECK(translate_union_set(a, b_map) == union_ref);
  }
  CHECK(std::abs(ref - oracle::entropy_of([&] {
          std::map<std::uint64_t, double> m;
          for (std::size_t i = 0; i < p.size(); ++i) m[i] = p[i];
          return m;
        }())) < 1e-9);
}
