#include "dyadlab/transversality.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>

#include "dyadlab/error.hpp"

namespace dyadlab {

std::vector<double> grid_from_step(double lo, double hi, double step) {
  if (!(step > 0.0)) throw Error("grid step must be positive");
  if (!(lo <= hi)) throw Error("empty parameter interval");
  if (step > hi - lo && hi > lo) throw Error("grid step larger than interval");
  std::vector<double> g;
  const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::int64_t i = 0; i <= count; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 1) throw Error("grid needs at least one point");
  if (points == 1) return {lo};
  if (!(lo < hi)) throw Error("empty parameter interval");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  g.back() = hi;
  return g;
}

namespace {

constexpr std::size_t kRecordCap = std::size_t{1} << 20;

std::uint64_t ipow(std::uint64_t b, int e) {
  std::uint64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

std::string word_text(std::uint64_t idx, std::uint64_t base, int len) {
  std::string s(len, '0');
  for (int i = len - 1; i >= 0; --i) {
    const auto d = idx % base;
    s[i] = static_cast<char>(d < 10 ? '0' + d : 'a' + (d - 10));
    idx /= base;
  }
  return s + "(0)";
}

// Pair index in a stratum -> (word I, word J) as base-B integers with the
// first symbol most significant.  Layout: w (m symbols), {a<b}, u, v.
struct StratumLayout {
  std::uint64_t base;
  int n;
  int m;
  std::uint64_t tail;  // B^(n-m-1)
  std::vector<std::pair<std::uint64_t, std::uint64_t>> ab;
  std::uint64_t total;

  StratumLayout(std::uint64_t b, int depth, int shared) : base(b), n(depth), m(shared) {
    tail = ipow(b, n - m - 1);
    for (std::uint64_t a = 0; a < b; ++a)
      for (std::uint64_t c = a + 1; c < b; ++c) ab.emplace_back(a, c);
    total = ipow(b, m) * ab.size() * tail * tail;
  }

  std::pair<std::uint64_t, std::uint64_t> decode(std::uint64_t idx) const {
    const std::uint64_t v = idx % tail;
    idx /= tail;
    const std::uint64_t u = idx % tail;
    idx /= tail;
    const auto [a, c] = ab[idx % ab.size()];
    const std::uint64_t w = idx / ab.size();
    return {((w * base + a) * tail) + u, ((w * base + c) * tail) + v};
  }
};

bool by_t_x_y(const Violation& a, const Violation& b) {
  return std::tie(a.t, a.x, a.y) < std::tie(b.t, b.x, b.y);
}

}  // namespace

TransversalityReport transversality_audit(const ParametricFamily& fam, double lo, double hi,
                                          const std::vector<double>& grid,
                                          const TransversalityOptions& opt) {
  if (opt.depth < 1 || opt.depth > 20) throw Error("audit depth must be in 1..20");
  if (grid.empty()) throw Error("empty parameter grid");
  if (!(lo <= hi)) throw Error("empty parameter interval");
  for (double t : grid) {
    if (t < lo - 1e-12 || t > hi + 1e-12) throw Error("grid point outside interval");
  }
  const std::uint64_t B = fam.alphabet();
  if (B < 2) throw Error("audit needs at least two symbols");
  const int n = opt.depth;
  const double words_d = std::pow(static_cast<double>(B), n);
  if (words_d > static_cast<double>(std::uint64_t{1} << 24)) throw Error("budget exceeded");
  const std::uint64_t nwords = ipow(B, n);

  TransversalityReport rep;
  rep.beta = opt.beta;
  rep.c_beta = opt.c_beta;
  rep.depth = n;
  rep.grid = grid;

  // Pair lists per stratum, fixed before any evaluation so the audit is
  // independent of scheduling.
  std::vector<StratumLayout> layouts;
  std::vector<std::vector<std::uint64_t>> samples;
  for (int m = 0; m < n; ++m) {
    layouts.emplace_back(B, n, m);
    const auto& L = layouts.back();
    StratumSummary s;
    s.shared_prefix = m;
    s.distance = std::ldexp(1.0, -m);
    s.pairs_total = L.total;
    std::vector<std::uint64_t> pick;
    if (L.total <= opt.stratum_budget) {
      s.pairs_audited = L.total;
      s.exhaustive = true;
    } else {
      std::mt19937_64 gen(opt.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(m));
      std::uniform_int_distribution<std::uint64_t> dist(0, L.total - 1);
      pick.resize(opt.stratum_budget);
      for (auto& p : pick) p = dist(gen);
      std::sort(pick.begin(), pick.end());
      s.pairs_audited = pick.size();
      s.exhaustive = false;
    }
    rep.pairs_audited += s.pairs_audited;
    rep.strata.push_back(s);
    samples.push_back(std::move(pick));
  }
  rep.evaluations = rep.pairs_audited * grid.size();

  std::vector<Jet2> point(nwords);
  std::vector<Jet2> prev;
  for (double t : grid) {
    const auto mj = fam.jets(t);
    // Tail point z of 0^inf, then V(d w) = r_d V(w) + s_d level by level.
    const Jet2 z = mj[0].s / (Jet2::constant(1.0) - mj[0].r);
    prev.assign(1, z);
    for (int len = 1; len <= n; ++len) {
      const std::uint64_t sub = prev.size();
      std::vector<Jet2> cur(sub * B);
      for (std::uint64_t d = 0; d < B; ++d)
        for (std::uint64_t w = 0; w < sub; ++w) cur[d * sub + w] = mj[d].r * prev[w] + mj[d].s;
      prev.swap(cur);
    }
    point = prev;

    for (int m = 0; m < n; ++m) {
      const auto& L = layouts[m];
      const double thr = opt.c_beta * std::pow(std::ldexp(1.0, -m), opt.beta);
      const bool exhaustive = rep.strata[m].exhaustive;
      const std::uint64_t count = exhaustive ? L.total : samples[m].size();
      std::uint64_t found = 0;
      std::vector<Violation> local_all;
#pragma omp parallel
      {
        std::vector<Violation> local;
        std::uint64_t local_found = 0;
#pragma omp for schedule(static)
        for (std::int64_t k = 0; k < static_cast<std::int64_t>(count); ++k) {
          const std::uint64_t idx = exhaustive ? static_cast<std::uint64_t>(k) : samples[m][k];
          const auto [i, j] = L.decode(idx);
          const Jet2 d = point[i] - point[j];
          if (std::abs(d.v) <= thr && std::abs(d.d1) < thr) {
            ++local_found;
            // Keep everything up to a hard cap so the final (t, x, y)-sorted
            // prefix does not depend on the thread split.
            if (local.size() < kRecordCap)
              local.push_back(Violation{word_text(i, B, n), word_text(j, B, n), t, d.v, d.d1});
          }
        }
#pragma omp critical(dyadlab_audit_merge)
        {
          found += local_found;
          local_all.insert(local_all.end(), local.begin(), local.end());
        }
      }
      rep.violation_count += found;
      rep.violations.insert(rep.violations.end(), local_all.begin(), local_all.end());
      std::sort(rep.violations.begin(), rep.violations.end(), by_t_x_y);
      if (rep.violations.size() > opt.max_recorded) rep.violations.resize(opt.max_recorded);
    }
  }
  return rep;
}

}  // namespace dyadlab
