#include "dyadlab/additive.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "dyadlab/error.hpp"
#include "dyadlab/kernels.hpp"

namespace dyadlab {

// ---- unions of translates ------------------------------------------------------------

namespace {

void check_map(const GridSet& a, const std::vector<GridSet>& b_map) {
  if (b_map.size() != a.size()) throw Error("B_a count does not match |A|");
  for (const auto& b : b_map) {
    if (b.resolution() != a.resolution()) throw Error("resolution mismatch");
    if (b.max_index() > (std::uint64_t{1} << a.resolution())) throw Error("B_a must lie on the unit grid");
  }
  if (a.max_index() > (std::uint64_t{1} << a.resolution())) throw Error("A must lie on the unit grid");
}

}  // namespace

GridSet translate_union_set(const GridSet& a, const std::vector<GridSet>& b_map) {
  check_map(a, b_map);
  const int n = a.resolution();
  const auto idx = a.indices();
  GridSet out = GridSet::sums(n);
#pragma omp parallel
  {
    GridSet local = GridSet::sums(n);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(idx.size()); ++i) local.or_shifted(b_map[i], idx[i]);
    // OR is exact and commutative, so the merge order does not matter.
#pragma omp critical(dyadlab_union_merge)
    out |= local;
  }
  return out;
}

GridSet translate_union_set_serial(const GridSet& a, const std::vector<GridSet>& b_map) {
  check_map(a, b_map);
  GridSet out = GridSet::sums(a.resolution());
  const auto idx = a.indices();
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (auto b : b_map[i].indices()) out.insert(idx[i] + b);
  return out;
}

GrowthReport translate_union(const GridSet& a, const GridSet& b, const std::vector<GridSet>& b_map) {
  if (b.resolution() != a.resolution()) throw Error("resolution mismatch");
  GrowthReport r;
  r.n = a.resolution();
  r.size_a = a.size();
  r.size_b = b.size();
  const GridSet u = translate_union_set(a, b_map);
  for (const auto& ba : b_map) {
    const auto s = ba.size();
    r.b_a_sizes.push_back(s);
    r.sum_b_a += s;
    r.max_b_a = std::max(r.max_b_a, s);
  }
  r.union_size = u.size();
  if (r.size_b > 1 && r.union_size > 0)
    r.exponent = std::log(static_cast<double>(r.union_size)) / std::log(static_cast<double>(r.size_b));
  return r;
}

// ---- additive energy -----------------------------------------------------------------

namespace {

// 64 bits of `w` starting at bit position `pos` (may be negative).
std::uint64_t window64(const std::vector<std::uint64_t>& w, std::int64_t pos) {
  const std::int64_t nbits = static_cast<std::int64_t>(w.size()) * 64;
  if (pos >= nbits || pos <= -64) return 0;
  if (pos < 0) return w[0] << (-pos);
  const std::size_t i = static_cast<std::size_t>(pos >> 6);
  const unsigned s = static_cast<unsigned>(pos & 63);
  std::uint64_t v = w[i] >> s;
  if (s && i + 1 < w.size()) v |= w[i + 1] << (64 - s);
  return v;
}

}  // namespace

std::uint64_t additive_energy(const GridSet& a, const GridSet& b) {
  if (a.resolution() != b.resolution()) throw Error("resolution mismatch");
  if (a.empty() || b.empty()) return 0;
  // r(s) = |A ∩ (s - B)|; with R the reflection j -> mb - j of B, s - B is R
  // shifted up by s - mb.
  const std::uint64_t mb = b.max_index();
  GridSet refl(b.resolution(), mb);
  for (auto j : b.indices()) refl.insert(mb - j);
  const auto& aw = a.words();
  const auto& rw = refl.words();
  std::vector<std::size_t> nz;
  for (std::size_t i = 0; i < aw.size(); ++i)
    if (aw[i]) nz.push_back(i);
  const std::int64_t smax = static_cast<std::int64_t>(a.max_index() + mb);
  std::uint64_t energy = 0;
  // Sparse sets: count pairs directly into per-thread representation arrays.
  const auto ai = a.indices(), bi = b.indices();
  if (ai.size() * bi.size() < static_cast<std::uint64_t>(smax + 1) * nz.size()) {
    std::vector<std::uint64_t> r(static_cast<std::size_t>(smax) + 1, 0);
#pragma omp parallel
    {
      std::vector<std::uint64_t> local(r.size(), 0);
#pragma omp for schedule(static) nowait
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(ai.size()); ++i)
        for (auto y : bi) ++local[ai[static_cast<std::size_t>(i)] + y];
#pragma omp critical
      for (std::size_t s = 0; s < r.size(); ++s) r[s] += local[s];
    }
    for (auto v : r) energy += v * v;
    return energy;
  }
#pragma omp parallel for schedule(static) reduction(+ : energy)
  for (std::int64_t s = 0; s <= smax; ++s) {
    const std::int64_t shift = s - static_cast<std::int64_t>(mb);
    std::uint64_t r = 0;
    for (auto i : nz) r += static_cast<std::uint64_t>(std::popcount(aw[i] & window64(rw, static_cast<std::int64_t>(i) * 64 - shift)));
    energy += r * r;
  }
  return energy;
}

std::uint64_t additive_energy_serial(const GridSet& a, const GridSet& b) {
  if (a.resolution() != b.resolution()) throw Error("resolution mismatch");
  std::vector<std::uint64_t> r(a.max_index() + b.max_index() + 1, 0);
  const auto bi = b.indices();
  for (auto x : a.indices())
    for (auto y : bi) ++r[x + y];
  std::uint64_t e = 0;
  for (auto v : r) e += v * v;
  return e;
}

// ---- regularization ------------------------------------------------------------------

namespace {

constexpr double kWindowSlack = 1e-12;

struct Run {
  std::size_t parent;
  double lo;  // smallest admissible rho
  double hi;  // largest admissible rho
  double sum;
  std::vector<std::uint64_t> keys;
};

TreeMeasure restrict_to(const TreeMeasure& mu, int depth, int cell_depth, const std::set<std::uint64_t>& keep) {
  std::vector<CellMass> leaves;
  const int shift = mu.dim() * (depth - cell_depth);
  for (const auto& c : mu.level(depth))
    if (keep.count(c.key >> shift)) leaves.push_back(c);
  return TreeMeasure::from_leaves(mu.dim(), depth, std::move(leaves));
}

}  // namespace

RegularizationResult regularize(const TreeMeasure& mu, int T, int l) {
  if (T < 1 || l < 1) throw Error("T and l must be positive");
  const int d = mu.dim();
  const int depth = l * T;
  if (depth > mu.max_depth()) throw Error("insufficient resolution");
  if (d * T > 8) throw Error("dT too large for the window search");
  const double total = mu.total_mass();
  if (!(total > 0.0)) throw Error("empty measure");

  RegularizationResult res;
  res.dim = d;
  res.T = T;
  res.l = l;
  res.sigma.assign(l, 0.0);
  res.ratio.assign(l, 1.0);
  res.mass_bound = std::pow(2.0 * T * d + 2.0, -l);

  std::vector<CellMass> leaves(mu.level(depth).begin(), mu.level(depth).end());
  TreeMeasure cur = TreeMeasure::from_leaves(d, depth, leaves);

  for (int i = l; i >= 1; --i) {
    const int pd = (i - 1) * T, cd = i * T;
    const auto parents = cur.level(pd);
    const auto children = cur.level(cd);
    std::vector<Run> runs;
    for (std::size_t p = 0; p < parents.size(); ++p) {
      const auto [first, last] = cur.descendant_range(pd, parents[p].key, cd);
      std::vector<std::size_t> order(last - first);
      std::iota(order.begin(), order.end(), first);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return children[x].mass < children[y].mass; });
      for (std::size_t a = 0; a < order.size(); ++a) {
        for (std::size_t b = a; b < order.size(); ++b) {
          const double mn = children[order[a]].mass, mx = children[order[b]].mass;
          if (a != b && !(mx <= 2.0 * mn * (1.0 - kWindowSlack))) break;
          Run r;
          r.parent = p;
          std::vector<std::size_t> members(order.begin() + a, order.begin() + b + 1);
          std::sort(members.begin(), members.end());
          r.sum = 0.0;
          for (auto m : members) {
            r.sum += children[m].mass;
            r.keys.push_back(children[m].key);
          }
          r.lo = mx / r.sum;
          r.hi = 2.0 * mn / r.sum * (1.0 - kWindowSlack);
          if (a == b) r.hi = std::max(r.hi, r.lo);
          if (r.lo <= r.hi) runs.push_back(std::move(r));
        }
      }
    }
    // Sweep rho upward: runs become admissible at lo and expire after hi.
    std::vector<std::size_t> by_lo(runs.size()), by_hi(runs.size());
    std::iota(by_lo.begin(), by_lo.end(), 0);
    std::iota(by_hi.begin(), by_hi.end(), 0);
    std::stable_sort(by_lo.begin(), by_lo.end(), [&](auto x, auto y) { return runs[x].lo < runs[y].lo; });
    std::stable_sort(by_hi.begin(), by_hi.end(), [&](auto x, auto y) { return runs[x].hi < runs[y].hi; });
    std::vector<std::multiset<kernels::Fixed>> active(parents.size());
    kernels::Fixed cur_total = 0, best_total = 0;
    double best_rho = 1.0;
    bool have = false;
    auto best_of = [&](std::size_t p) -> kernels::Fixed {
      return active[p].empty() ? kernels::Fixed{0} : *active[p].rbegin();
    };
    std::size_t hi_pos = 0;
    for (std::size_t k = 0; k < by_lo.size();) {
      const double rho = runs[by_lo[k]].lo;
      while (hi_pos < by_hi.size() && runs[by_hi[hi_pos]].hi < rho) {
        const Run& r = runs[by_hi[hi_pos++]];
        if (r.lo > r.hi) continue;
        auto& s = active[r.parent];
        const auto it = s.find(kernels::to_fixed(r.sum / total));
        if (it == s.end()) continue;  // expired before it was added
        const auto before = best_of(r.parent);
        s.erase(it);
        cur_total = cur_total - before + best_of(r.parent);
      }
      while (k < by_lo.size() && runs[by_lo[k]].lo == rho) {
        const Run& r = runs[by_lo[k++]];
        if (r.hi < rho) continue;
        const auto before = best_of(r.parent);
        active[r.parent].insert(kernels::to_fixed(r.sum / total));
        cur_total = cur_total - before + best_of(r.parent);
      }
      if (!have || cur_total > best_total) {
        best_total = cur_total;
        best_rho = rho;
        have = true;
      }
    }
    if (!have) throw Error("empty measure");
    // Per parent, the heaviest run admissible at best_rho.
    std::vector<const Run*> pick(parents.size(), nullptr);
    for (const auto& r : runs) {
      if (!(r.lo <= best_rho && best_rho <= r.hi)) continue;
      if (!pick[r.parent] || r.sum > pick[r.parent]->sum) pick[r.parent] = &r;
    }
    std::set<std::uint64_t> keep;
    for (const auto* r : pick)
      if (r) keep.insert(r->keys.begin(), r->keys.end());
    cur = restrict_to(cur, depth, cd, keep);

    // The ratio actually realized by the restricted measure.
    double rho = 0.0;
    const auto kids = cur.level(cd);
    const int sh = d * T;
    for (const auto& c : kids) rho = std::max(rho, c.mass / cur.mass(pd, c.key >> sh));
    for (const auto& c : kids) {
      const double pm = cur.mass(pd, c.key >> sh);
      while (c.mass > rho * pm) rho = std::nextafter(rho, 2.0);
    }
    res.ratio[i - 1] = rho;
    res.sigma[i - 1] = rho >= 1.0 ? 0.0 : std::clamp(-std::log2(rho) / T, 0.0, static_cast<double>(d));
  }
  for (const auto& c : cur.level(depth)) res.cells.push_back(c.key);
  res.retained_mass = cur.total_mass() / total;
  res.restricted = std::move(cur);
  return res;
}

RegularizationCheck check_regularization(const TreeMeasure& mu, const RegularizationResult& r) {
  RegularizationCheck chk;
  const int depth = r.l * r.T;
  std::set<std::uint64_t> keep(r.cells.begin(), r.cells.end());
  const TreeMeasure x = restrict_to(mu, depth, depth, keep);
  const double retained = x.total_mass() / mu.total_mass();
  chk.mass_ok = retained >= std::pow(2.0 * r.T * r.dim + 2.0, -r.l);
  if (!chk.mass_ok) {
    std::ostringstream os;
    os << "mass clause: retained " << retained;
    chk.failure = os.str();
  }
  chk.ratio_ok = true;
  for (int i = 1; i <= r.l && chk.ratio_ok; ++i) {
    const double rho = r.ratio[i - 1];
    if (!(r.sigma[i - 1] >= 0.0 && r.sigma[i - 1] <= r.dim)) chk.ratio_ok = false;
    const int sh = r.dim * r.T;
    for (const auto& c : x.level(i * r.T)) {
      const double pm = x.mass((i - 1) * r.T, c.key >> sh);
      if (!(c.mass <= rho * pm && rho * pm <= 2.0 * c.mass)) {
        chk.ratio_ok = false;
        std::ostringstream os;
        os << "ratio clause at level " << i << ", cell key " << c.key;
        if (chk.failure.empty()) chk.failure = os.str();
        break;
      }
    }
  }
  return chk;
}

// ---- porosity --------------------------------------------------------------------------

GridSet base4_low_digit_set(int n) {
  GridSet g = GridSet::unit(n);
  const std::uint64_t top = std::uint64_t{1} << n;
  for (std::uint64_t j = 0; j < top; ++j) {
    // Binary digit i (1-based from the top) is the high bit of a base-4
    // digit when i is odd; those must vanish.
    bool ok = true;
    for (int i = 1; i <= n && ok; i += 2)
      if ((j >> (n - i)) & 1U) ok = false;
    if (ok) g.insert(j);
  }
  return g;
}

namespace {

std::string grid_point(std::uint64_t j, int n) {
  const std::uint64_t den = std::uint64_t{1} << n;
  const std::uint64_t g = std::gcd(j, den);
  if (j == 0) return "0";
  std::ostringstream os;
  os << j / g;
  if (den / g != 1) os << '/' << den / g;
  return os.str();
}

}  // namespace

PorosityResult porosity_witness(const TreeMeasure& mu, const GridSet& dset, int n, int l, double tau,
                                double gamma) {
  if (mu.dim() != 1) throw Error("porosity needs a measure on the line");
  if (n < 1 || l < 1 || l >= n) throw Error("need 1 <= l < n");
  if (n > mu.max_depth()) throw Error("insufficient resolution");
  if (dset.resolution() != n) throw Error("resolution mismatch");
  if (!(tau > 0.0 && tau < 1.0)) throw Error("tau must lie in (0,1)");
  const auto pts = dset.indices();
  if (pts.empty()) throw Error("empty set D");
  if (pts.back() >= (std::uint64_t{1} << n)) throw Error("D must lie in [0,1)");

  auto m = [&](int k, std::uint64_t j) { return mu.mass(k, j >> (n - k)); };
  // single[k][i]: D_k(x_i) contains exactly one D-meeting cell of depth k+l.
  std::vector<std::vector<char>> single(n - l + 1, std::vector<char>(pts.size(), 0));
  for (int k = 1; k <= n - l; ++k) {
    for (std::size_t i = 0; i < pts.size();) {
      std::size_t j = i;
      const std::uint64_t cell = pts[i] >> (n - k);
      bool one = true;
      const std::uint64_t sub = pts[i] >> (n - k - l);
      while (j < pts.size() && (pts[j] >> (n - k)) == cell) {
        if ((pts[j] >> (n - k - l)) != sub) one = false;
        ++j;
      }
      for (std::size_t q = i; q < j; ++q) single[k][q] = one;
      i = j;
    }
  }
  const double need1 = n * (1.0 - gamma / 2.0), need2 = n * gamma;
  PorosityResult res;
  int blocks_min = std::numeric_limits<int>::max();
  std::vector<std::uint64_t> live;
  std::vector<int> live_blocks;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    int c1 = 0, c2 = 0;
    std::vector<int> both;
    for (int k = 1; k <= n - l; ++k) {
      const bool decay = m(k + l, pts[i]) <= tau * m(k, pts[i]);
      c1 += decay;
      c2 += single[k][i];
      if (decay && single[k][i]) both.push_back(k);
    }
    if (c1 < need1) {
      std::ostringstream os;
      os << "porosity hypothesis (mass decay) fails at x=" << grid_point(pts[i], n) << " (" << c1 << " < "
         << need1 << ")";
      throw Error(os.str());
    }
    if (c2 < need2) {
      std::ostringstream os;
      os << "porosity hypothesis (single child) fails at x=" << grid_point(pts[i], n) << " (" << c2 << " < "
         << need2 << ")";
      throw Error(os.str());
    }
    if (!(m(n, pts[i]) > 0.0)) continue;  // null cells carry no mass of D
    int blocks = 0, next = 0;
    for (int k : both)
      if (k >= next) {
        ++blocks;
        next = k + l;
      }
    live.push_back(pts[i]);
    live_blocks.push_back(blocks);
    blocks_min = std::min(blocks_min, blocks);
  }
  if (live.empty()) throw Error("D carries no mass");

  // nu top-down: nu(Q') = nu(Q) mu(Q') / (mu(Q) a_Q), a_Q the mu-share of the
  // D-meeting children of Q.
  std::vector<double> nu(live.size(), 1.0);
  for (int k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < live.size();) {
      std::size_t j = i;
      const std::uint64_t cell = live[i] >> (n - k);
      double kids = 0.0;
      std::uint64_t last_child = ~std::uint64_t{0};
      while (j < live.size() && (live[j] >> (n - k)) == cell) {
        const std::uint64_t child = live[j] >> (n - k - 1);
        if (child != last_child) kids += m(k + 1, live[j]);
        last_child = child;
        ++j;
      }
      for (std::size_t q = i; q < j; ++q) nu[q] *= m(k + 1, live[q]) / kids;
      i = j;
    }
  }
  std::vector<CellMass> leaves;
  res.pointwise_ok = true;
  res.min_gain = std::numeric_limits<double>::infinity();
  std::vector<double> cell_mass;
  for (std::size_t i = 0; i < live.size(); ++i) {
    leaves.push_back(CellMass{live[i], nu[i]});
    const double mm = m(n, live[i]);
    cell_mass.push_back(mm);
    const double gain = nu[i] / mm;
    res.min_gain = std::min(res.min_gain, gain);
    if (gain < std::pow(tau, -blocks_min) * (1.0 - 1e-12)) res.pointwise_ok = false;
  }
  res.nu = TreeMeasure::from_leaves(1, n, std::move(leaves));
  res.blocks = blocks_min;
  res.rho = static_cast<double>(blocks_min) / n;
  res.bound = std::pow(tau, blocks_min);
  res.mu_d = 0.0;
  for (double v : cell_mass) res.mu_d += v;
  res.mu_d /= mu.total_mass();
  res.points = pts.size();
  return res;
}

// ---- entropy-increase experiment ---------------------------------------------------------

TreeMeasure grid_measure(int n, int l, const std::vector<std::pair<std::uint64_t, double>>& masses) {
  if (n < 1 || l < 0 || n + l > 40) throw Error("depth out of range");
  std::vector<CellMass> leaves;
  for (const auto& [j, m] : masses) {
    if (j >= (std::uint64_t{1} << n)) throw Error("grid measure must live on [0,1)");
    leaves.push_back(CellMass{j << l, m});
  }
  return TreeMeasure::from_leaves(1, n + l, std::move(leaves));
}

ExperimentReport entropy_increase_experiment(const TreeMeasure& eta, const GridSet& a, const GridSet& b,
                                             const std::vector<GridSet>& b_map, const ExperimentParams& p) {
  const int n = a.resolution();
  if (b.resolution() != n) throw Error("resolution mismatch");
  if (p.l < 1) throw Error("l must be positive");
  if (eta.dim() != 1 || eta.max_depth() < n + p.l) throw Error("insufficient resolution");
  const auto aidx = a.indices();
  if (!aidx.empty() && aidx.back() >= (std::uint64_t{1} << n)) throw Error("A must lie in [0,1)");
  ExperimentReport rep;
  rep.n = n;
  rep.params = p;
  const int fine = n + p.l;
  const double total = eta.total_mass();
  auto em = [&](int k, std::uint64_t j) { return eta.mass(k, (j << p.l) >> (fine - k)); };

  double mass = 0.0;
  for (auto j : aidx) mass += em(fine, j);
  rep.eta_a = mass / total;
  rep.hypotheses.mass = rep.eta_a >= 0.5;

  rep.spreading_needed = (1.0 - p.gamma / 2.0) * n;
  rep.min_spreading_count = aidx.empty() ? 0 : std::numeric_limits<std::uint64_t>::max();
  for (auto j : aidx) {
    std::uint64_t c = 0;
    for (int k = 1; k <= n; ++k)
      if (em(k, j) >= 2.0 * em(k + p.l, j)) ++c;
    rep.min_spreading_count = std::min(rep.min_spreading_count, c);
  }
  rep.hypotheses.spreading = !aidx.empty() && static_cast<double>(rep.min_spreading_count) >= rep.spreading_needed;

  const double bs = static_cast<double>(b.size());
  rep.hypotheses.b_small = bs <= std::exp2(n * (1.0 - p.gamma));
  rep.hypotheses.b_a_large = true;
  rep.hypotheses.b_a_subset = true;
  if (b_map.size() != aidx.size()) throw Error("B_a count does not match |A|");
  for (const auto& ba : b_map) {
    if (static_cast<double>(ba.size()) < std::pow(bs, 1.0 - p.delta)) rep.hypotheses.b_a_large = false;
    for (auto j : ba.indices())
      if (!b.contains(j)) rep.hypotheses.b_a_subset = false;
  }
  rep.growth = translate_union(a, b, b_map);
  rep.target = std::pow(bs, 1.0 + p.delta);
  rep.growth_verdict = static_cast<double>(rep.growth.union_size) >= rep.target;
  return rep;
}

ExperimentReport positive_preset(int n, const ExperimentParams& p) {
  if (n < 2 || n > 20) throw Error("n out of range");
  const std::uint64_t top = std::uint64_t{1} << n;
  std::vector<std::pair<std::uint64_t, double>> masses;
  GridSet a = GridSet::unit(n);
  for (std::uint64_t j = 0; j < top; ++j) {
    masses.emplace_back(j, 1.0 / static_cast<double>(top));
    a.insert(j);
  }
  const GridSet b = GridSet::progression(n, 0, 1, std::uint64_t{1} << (n / 2));
  return entropy_increase_experiment(grid_measure(n, p.l, masses), a, b, std::vector<GridSet>(a.size(), b), p);
}

ExperimentReport failed_preset(int n, const ExperimentParams& p) {
  if (n < 2 || n > 20) throw Error("n out of range");
  const std::uint64_t at = std::uint64_t{1} << (n - 1);
  GridSet a = GridSet::unit(n);
  a.insert(at);
  const GridSet b = GridSet::progression(n, 0, 1, std::uint64_t{1} << (n / 2));
  return entropy_increase_experiment(grid_measure(n, p.l, {{at, 1.0}}), a, b, {b}, p);
}

AdversarialReport adversarial_search(int n, const ExperimentParams& p) {
  if (n < 3 || n > 12) throw Error("n out of range");
  AdversarialReport rep;
  rep.n = n;
  rep.params = p;
  const std::uint64_t top = std::uint64_t{1} << n;
  const std::pair<const char*, std::uint64_t> kinds[] = {{"full", 1}, {"every2", 2}, {"every4", 4}};
  for (const auto& [kind, astep] : kinds) {
    GridSet a = GridSet::unit(n);
    std::vector<std::pair<std::uint64_t, double>> masses;
    for (std::uint64_t j = 0; j < top; j += astep) a.insert(j);
    const double w = 1.0 / static_cast<double>(a.size());
    for (auto j : a.indices()) masses.emplace_back(j, w);
    const TreeMeasure eta = grid_measure(n, p.l, masses);
    const auto aidx = a.indices();
    for (std::uint64_t d : {1, 2, 3, 5, 8}) {
      for (std::uint64_t len : {4, 8, 16, 32, 64}) {
        if ((len - 1) * d > top) continue;
        const GridSet b = GridSet::progression(n, 0, d, len);
        const auto win = static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<double>(len), 1.0 - p.delta)));
        std::vector<GridSet> windows;
        for (std::uint64_t o = 0; o + win <= len; ++o) windows.push_back(GridSet::progression(n, o * d, d, win));
        GridSet u = GridSet::sums(n);
        std::vector<GridSet> b_map;
        for (auto x : aidx) {
          std::size_t best = 0;
          std::uint64_t best_new = std::numeric_limits<std::uint64_t>::max();
          for (std::size_t o = 0; o < windows.size(); ++o) {
            GridSet s = GridSet::sums(n);
            s.or_shifted(windows[o], x);
            std::uint64_t fresh = 0;
            for (std::size_t i = 0; i < s.words().size(); ++i)
              fresh += static_cast<std::uint64_t>(std::popcount(s.words()[i] & ~u.words()[i]));
            if (fresh < best_new) {
              best_new = fresh;
              best = o;
            }
          }
          u.or_shifted(windows[best], x);
          b_map.push_back(windows[best]);
        }
        const ExperimentReport er = entropy_increase_experiment(eta, a, b, b_map, p);
        AdversarialInstance inst;
        inst.a_kind = kind;
        inst.step = d;
        inst.length = len;
        inst.window = win;
        inst.hypotheses = er.hypotheses;
        inst.union_size = er.growth.union_size;
        inst.exponent = er.growth.exponent.value_or(0.0);
        inst.growth = er.growth_verdict;
        if (inst.hypotheses.all()) {
          if (!rep.min_exponent || inst.exponent < *rep.min_exponent) rep.min_exponent = inst.exponent;
          if (!inst.growth) rep.counterexample = true;
        }
        rep.instances.push_back(std::move(inst));
      }
    }
  }
  return rep;
}

BsgBridge bsg_bridge(const GridSet& a, const GridSet& b, const std::vector<GridSet>& b_map,
                     std::optional<double> log2_l) {
  BsgBridge r;
  const GridSet s = translate_union_set(a, b_map);
  for (const auto& ba : b_map) r.g_size += ba.size();
  r.sumset_size = s.size();
  r.energy = additive_energy(a, b);
  r.log_l = log2_l.value_or(static_cast<double>(a.resolution()));
  if (!(r.log_l > 0.0)) throw Error("L must exceed 1");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double g = static_cast<double>(r.g_size), ss = static_cast<double>(r.sumset_size);
  if (g == 0.0 || ss == 0.0) throw Error("empty graph");
  const double dg = std::log2(na * nb / g) / r.log_l;
  const double ds = std::log2(ss / na) / r.log_l;
  r.delta = std::max({0.0, dg, ds});
  r.cs_bound = g * g / ss;
  r.bound = std::exp2(-3.0 * r.delta * r.log_l) * na * nb * nb;
  r.bound_2delta = std::exp2(-2.0 * r.delta * r.log_l) * na * nb * nb;
  const double e = static_cast<double>(r.energy);
  r.holds = e >= r.cs_bound * (1.0 - 1e-12) && r.cs_bound >= r.bound * (1.0 - 1e-12);
  r.holds_2delta = e >= r.bound_2delta * (1.0 - 1e-12);
  return r;
}

}  // namespace dyadlab
