#include "dyadlab/scan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dyadlab/entropy.hpp"
#include "dyadlab/error.hpp"

namespace dyadlab {

EntropyProfile entropy_profile(const ParametricFamily& fam, const std::vector<double>& grid, int n,
                               const BuildOptions& opt, const std::vector<double>* weights) {
  if (grid.empty()) throw Error("empty parameter grid");
  if (n < 1) throw Error("depth must be positive");
  EntropyProfile prof;
  prof.depth = n;
  prof.guard = opt.guard;
  for (double t : grid) {
    const WeightedIFS ifs = weights ? fam.at(t, *weights) : fam.at(t);
    const IfsTree tree = build_tree_measure(ifs, n, opt);
    const EntropyReport r = shannon_entropy(tree.measure, n);
    prof.t.push_back(t);
    prof.entropy_bits.push_back(r.entropy_bits);
    prof.normalized.push_back(r.normalized);
    prof.sd.push_back(ifs.similarity_dimension());
  }
  return prof;
}

BranchDecomposition branch_decomposition(const ParametricFamily& fam, double t0, int n, double x0,
                                         std::uint64_t budget) {
  if (n < 1 || n > 52) throw Error("depth out of range");
  const WeightedIFS ifs = fam.at(t0);
  BranchDecomposition dec;
  dec.depth = n;
  dec.t0 = t0;
  dec.x0 = x0;
  dec.alphabet = ifs.size();
  dec.words = stopping_words(ifs, n, budget);
  std::vector<std::pair<std::int64_t, std::uint32_t>> placed;
  placed.reserve(dec.words.size());
  for (std::uint32_t i = 0; i < dec.words.size(); ++i) {
    const double x = dec.words[i].apply(x0);
    placed.emplace_back(static_cast<std::int64_t>(std::floor(std::ldexp(x, n))), i);
  }
  std::sort(placed.begin(), placed.end());
  for (const auto& [coord, idx] : placed) {
    if (dec.cells.empty() || dec.cells.back().coord != coord) dec.cells.push_back(BranchCell{coord, {}, 0.0});
    dec.cells.back().words.push_back(idx);
    dec.cells.back().a += dec.words[idx].p;
  }
  return dec;
}

double word_entropy(const BranchDecomposition& dec) {
  double h = 0.0;
  for (const auto& w : dec.words) h -= w.p * std::log2(w.p);
  return h;
}

double cell_entropy(const BranchDecomposition& dec) {
  double h = 0.0;
  for (const auto& c : dec.cells) h -= c.a * std::log2(c.a);
  return h;
}

double branch_entropy_excess(const BranchDecomposition& dec) {
  double total = 0.0;
  for (const auto& c : dec.cells) {
    double inner = 0.0;
    for (auto i : c.words) {
      const double q = dec.words[i].p / c.a;
      inner += q * std::log2(c.a / dec.words[i].p);
    }
    total += c.a * inner;
  }
  return total / dec.depth;
}

namespace {

const BranchCell& cell_at(const BranchDecomposition& dec, std::size_t cell) {
  if (cell >= dec.cells.size()) throw Error("cell index out of range");
  const BranchCell& c = dec.cells[cell];
  if (c.words.empty()) throw Error("empty component");
  return c;
}

template <class Key>
double grouped_entropy(std::vector<std::pair<Key, double>>& v, double total) {
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double h = 0.0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    double m = 0.0;
    while (j < v.size() && v[j].first == v[i].first) m += v[j++].second;
    const double q = m / total;
    if (q > 0.0) h -= q * std::log2(q);
    i = j;
  }
  return h;
}

}  // namespace

double atom_entropy(const BranchDecomposition& dec, std::size_t cell, int scale_depth) {
  const BranchCell& c = cell_at(dec, cell);
  if (scale_depth < 0 || scale_depth > 52) throw Error("insufficient resolution");
  std::vector<std::pair<std::int64_t, double>> v;
  for (auto i : c.words) {
    v.emplace_back(static_cast<std::int64_t>(std::floor(std::ldexp(dec.words[i].s, scale_depth))),
                   dec.words[i].p);
  }
  return grouped_entropy(v, c.a);
}

double atom_entropy(const ParametricFamily& fam, const BranchDecomposition& dec, std::size_t cell,
                    int scale_depth, const BigFloat& t) {
  const BranchCell& c = cell_at(dec, cell);
  if (scale_depth < 0 || scale_depth > 150) throw Error("insufficient resolution");
  const auto coeffs = fam.coefficients(t);
  const BigFloat scale = boost::multiprecision::ldexp(BigFloat(1), scale_depth);
  std::vector<std::pair<BigFloat, double>> v;
  v.reserve(c.words.size());
  for (auto i : c.words) {
    BigFloat r = 1, s = 0;
    for (auto sym : dec.words[i].symbols) {
      s = r * coeffs[sym].s + s;
      r = r * coeffs[sym].r;
    }
    v.emplace_back(boost::multiprecision::floor(s * scale), dec.words[i].p);
  }
  return grouped_entropy(v, c.a);
}

std::size_t most_collapsed_cell(const ParametricFamily& fam, const BranchDecomposition& dec, int scale_depth,
                                const BigFloat& t0) {
  if (dec.cells.empty()) throw Error("empty component");
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t q = 0; q < dec.cells.size(); ++q) {
    const auto& c = dec.cells[q];
    if (c.words.size() < 2) continue;
    double hw = 0.0;
    for (auto i : c.words) {
      const double p = dec.words[i].p / c.a;
      hw -= p * std::log2(p);
    }
    const double gap = hw - atom_entropy(fam, dec, q, scale_depth, t0);
    if (gap > best_gap + 1e-12) {
      best_gap = gap;
      best = q;
    }
  }
  return best;
}

// ---- dip detection -----------------------------------------------------------

namespace {

struct PolyWord {
  std::vector<std::uint8_t> symbols;
  Polynomial r;
  Polynomial s;
};

double bisect(const Polynomial& d, double a, double b) {
  double fa = d(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = d(m);
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

std::optional<double> root_near(const Polynomial& d, double t, double step) {
  const double pts[3] = {t - step, t, t + step};
  std::optional<double> best;
  auto consider = [&](double r) {
    if (!best || std::abs(r - t) < std::abs(*best - t)) best = r;
  };
  for (double p : pts)
    if (d(p) == 0.0) consider(p);
  for (int i = 0; i < 2; ++i) {
    const double fa = d(pts[i]), fb = d(pts[i + 1]);
    if ((fa < 0 && fb > 0) || (fa > 0 && fb < 0)) consider(bisect(d, pts[i], pts[i + 1]));
  }
  return best;
}

std::optional<OverlapWitness> find_witness(const ParametricFamily& fam, double t, double step, int depth) {
  const auto& maps = fam.polynomials();
  const std::size_t B = maps.size();
  const Polynomial one = maps[0].r.exact() ? Polynomial(std::vector<Rational>{1}) : Polynomial::constant(1.0);
  const Polynomial zero = maps[0].r.exact() ? Polynomial(std::vector<Rational>{0}) : Polynomial::constant(0.0);
  std::vector<PolyWord> level{PolyWord{{}, one, zero}};
  for (int len = 1; len <= depth; ++len) {
    std::vector<PolyWord> next;
    next.reserve(level.size() * B);
    for (const auto& w : level) {
      for (std::size_t i = 0; i < B; ++i) {
        PolyWord e{w.symbols, w.r * maps[i].r, w.r * maps[i].s + w.s};
        e.symbols.push_back(static_cast<std::uint8_t>(i));
        next.push_back(std::move(e));
      }
    }
    level = std::move(next);
    std::optional<OverlapWitness> best;
    for (std::size_t a = 0; a < level.size(); ++a) {
      for (std::size_t b = a + 1; b < level.size(); ++b) {
        if (!(level[a].r == level[b].r)) continue;
        const Polynomial d = level[a].s - level[b].s;
        const auto root = d.is_zero() ? std::optional<double>(t) : root_near(d, t, step);
        if (!root) continue;
        if (!best || std::abs(*root - t) < std::abs(best->root - t)) {
          best = OverlapWitness{word_string(level[a].symbols, B), word_string(level[b].symbols, B), len, *root};
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

}  // namespace

DipReport dip_detector(const EntropyProfile& profile, double threshold, const ParametricFamily* fam,
                       int witness_depth) {
  if (profile.t.empty()) throw Error("empty profile");
  DipReport rep;
  rep.threshold = threshold;
  const std::size_t m = profile.t.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double deficit = std::min(1.0, profile.sd[i]) - profile.normalized[i];
    if (!(deficit > threshold)) continue;
    DipFlag f;
    f.index = i;
    f.t = profile.t[i];
    f.deficit = deficit;
    if (fam && fam->closed_form()) {
      double step = 1e-3;
      if (m > 1) {
        step = 0.0;
        if (i > 0) step = std::max(step, profile.t[i] - profile.t[i - 1]);
        if (i + 1 < m) step = std::max(step, profile.t[i + 1] - profile.t[i]);
      }
      f.witness = find_witness(*fam, f.t, step, witness_depth);
    }
    rep.flags.push_back(std::move(f));
  }
  std::stable_sort(rep.flags.begin(), rep.flags.end(),
                   [](const DipFlag& a, const DipFlag& b) { return a.deficit > b.deficit; });
  return rep;
}

}  // namespace dyadlab
