#include "dyadlab/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dyadlab/error.hpp"
#include "dyadlab/kernels.hpp"

namespace dyadlab {

namespace {

void check_depth(const TreeMeasure& mu, int k) {
  if (k < 0 || k > mu.max_depth()) throw Error("insufficient resolution");
}

// For a probability measure the cell masses are used directly; otherwise the
// measure is normalized first (entropy of mu / |mu|).
double normalized_entropy(std::span<const CellMass> cells, double total, bool parallel) {
  if (total == 1.0) {
    return parallel ? kernels::entropy_bits(cells) : kernels::entropy_bits_serial(cells);
  }
  std::vector<double> p(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) p[i] = cells[i].mass / total;
  return parallel ? kernels::entropy_bits(std::span<const double>(p))
                  : kernels::entropy_bits_serial(std::span<const double>(p));
}

}  // namespace

EntropyReport shannon_entropy(const TreeMeasure& mu, int k) {
  check_depth(mu, k);
  EntropyReport r;
  r.depth = k;
  r.entropy_bits = normalized_entropy(mu.level(k), mu.total_mass(), true);
  r.normalized = k > 0 ? r.entropy_bits / k : 0.0;
  return r;
}

double shannon_entropy_serial(const TreeMeasure& mu, int k) {
  check_depth(mu, k);
  return normalized_entropy(mu.level(k), mu.total_mass(), false);
}

EntropySplit refine_entropy_decomposition(const TreeMeasure& mu, int k1, int k2) {
  check_depth(mu, k1);
  check_depth(mu, k2);
  if (k1 > k2) throw Error("k1 must not exceed k2");
  const double total = mu.total_mass();
  EntropySplit out;
  out.coarse = shannon_entropy(mu, k1).entropy_bits;
  const auto coarse = mu.level(k1);
  const auto fine = mu.level(k2);
  double cond = 0.0;
  std::size_t j = 0;
  const int shift = mu.dim() * (k2 - k1);
  for (const auto& a1 : coarse) {
    double inner = 0.0;
    while (j < fine.size() && (fine[j].key >> shift) == a1.key) {
      const double ratio = fine[j].mass / a1.mass;
      inner += ratio * std::log2(1.0 / ratio);
      ++j;
    }
    cond += (a1.mass / total) * inner;
  }
  out.conditional = cond;
  return out;
}

double component_entropy(const TreeMeasure& mu, int depth, std::uint64_t key, int T) {
  check_depth(mu, depth + T);
  const double m = mu.mass(depth, key);
  if (!(m > 0.0)) throw Error("empty component");
  const auto [first, last] = mu.descendant_range(depth, key, depth + T);
  const auto lv = mu.level(depth + T);
  double h = 0.0;
  for (std::size_t i = first; i < last; ++i) {
    const double q = lv[i].mass / m;
    if (q > 0.0) h -= q * std::log2(q);
  }
  return h;
}

double multiscale_entropy(const TreeMeasure& mu, int n, int T) {
  if (n < 0 || T < 1) throw Error("invalid multiscale parameters");
  check_depth(mu, n + T);
  const double total = mu.total_mass();
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto lv = mu.level(k);
    const auto fine = mu.level(k + T);
    const int shift = mu.dim() * T;
    std::vector<double> part(lv.size(), 0.0);
    // Descendant runs are contiguous and in the same order as the parents.
    std::vector<std::size_t> start(lv.size() + 1, fine.size());
    {
      std::size_t j = 0;
      for (std::size_t i = 0; i < lv.size(); ++i) {
        while (j < fine.size() && (fine[j].key >> shift) < lv[i].key) ++j;
        start[i] = j;
      }
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(lv.size()); ++ii) {
      const std::size_t i = static_cast<std::size_t>(ii);
      const double m = lv[i].mass;
      double h = 0.0;
      for (std::size_t j = start[i]; j < fine.size() && (fine[j].key >> shift) == lv[i].key; ++j) {
        const double q = fine[j].mass / m;
        h -= q * std::log2(q);
      }
      part[i] = (m / total) * h;
    }
    for (double v : part) sum += v;
  }
  return sum / T;
}

std::size_t covering_number(std::span<const DyadicCell> cells, int m) {
  std::vector<std::array<std::int64_t, 2>> anc;
  anc.reserve(cells.size());
  for (const auto& c : cells) {
    if (m > c.depth) throw Error("covering scale finer than cells");
    anc.push_back(c.ancestor(m).coords);
  }
  std::sort(anc.begin(), anc.end());
  return static_cast<std::size_t>(std::unique(anc.begin(), anc.end()) - anc.begin());
}

std::size_t covering_number(const TreeMeasure& mu, int m) { return mu.support_size(m); }

}  // namespace dyadlab
