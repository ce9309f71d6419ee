#include "dyadlab/tree_measure.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dyadlab/error.hpp"

namespace dyadlab {

namespace {

void check_dim_depth(int dim, int depth) {
  if (dim != 1 && dim != 2) throw Error("dimension must be 1 or 2");
  if (depth < 0 || depth > max_key_depth(dim)) throw Error("depth out of range");
}

void sort_and_merge(std::vector<CellMass>& v) {
  std::sort(v.begin(), v.end(),
            [](const CellMass& a, const CellMass& b) { return a.key < b.key; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    double m = 0.0;
    while (j < v.size() && v[j].key == v[i].key) m += v[j++].mass;
    if (m < 0.0) throw Error("negative mass");
    if (m > 0.0) v[out++] = CellMass{v[i].key, m};
    i = j;
  }
  v.resize(out);
}

}  // namespace

TreeMeasure TreeMeasure::from_leaves(int dim, int depth, std::vector<CellMass> leaves) {
  check_dim_depth(dim, depth);
  const std::uint64_t limit = depth == 0 ? 1 : (std::uint64_t{1} << (dim * depth));
  for (const auto& c : leaves) {
    if (c.key >= limit) throw Error("leaf key outside unit cube");
    if (!(c.mass >= 0.0) || !std::isfinite(c.mass)) throw Error("invalid mass");
  }
  sort_and_merge(leaves);
  TreeMeasure t;
  t.dim_ = dim;
  t.depth_ = depth;
  t.levels_.resize(depth + 1);
  t.levels_[depth] = std::move(leaves);
  for (int k = depth - 1; k >= 0; --k) {
    const auto& fine = t.levels_[k + 1];
    auto& coarse = t.levels_[k];
    for (const auto& c : fine) {
      const std::uint64_t pk = c.key >> dim;
      if (!coarse.empty() && coarse.back().key == pk) {
        coarse.back().mass += c.mass;
      } else {
        coarse.push_back(CellMass{pk, c.mass});
      }
    }
  }
  return t;
}

TreeMeasure TreeMeasure::from_levels(int dim, std::vector<std::vector<CellMass>> levels) {
  if (levels.empty()) throw Error("no levels");
  check_dim_depth(dim, static_cast<int>(levels.size()) - 1);
  for (auto& lv : levels) {
    if (!std::is_sorted(lv.begin(), lv.end(),
                        [](const CellMass& a, const CellMass& b) { return a.key < b.key; })) {
      throw Error("level not sorted");
    }
  }
  TreeMeasure t;
  t.dim_ = dim;
  t.depth_ = static_cast<int>(levels.size()) - 1;
  t.levels_ = std::move(levels);
  return t;
}

TreeMeasure TreeMeasure::uniform(int dim, int depth) {
  check_dim_depth(dim, depth);
  const std::uint64_t n = std::uint64_t{1} << (dim * depth);
  const double m = std::ldexp(1.0, -dim * depth);
  std::vector<CellMass> leaves(n);
  for (std::uint64_t i = 0; i < n; ++i) leaves[i] = CellMass{i, m};
  return from_leaves(dim, depth, std::move(leaves));
}

TreeMeasure TreeMeasure::dirac(std::span<const double> point, int depth) {
  const int dim = static_cast<int>(point.size());
  check_dim_depth(dim, depth);
  const DyadicCell c = cell_of_point(point, depth);
  return from_leaves(dim, depth, {CellMass{morton_key(c), 1.0}});
}

TreeMeasure TreeMeasure::digit_measure(int dim, int bits, std::span<const double> weights,
                                       int depth) {
  check_dim_depth(dim, depth);
  if (bits < 1) throw Error("digit width must be positive");
  const std::size_t nd = std::size_t{1} << (dim * bits);
  if (weights.size() != nd) throw Error("digit weights size mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error("negative digit weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("digit weights must sum to 1");

  const int digits = (depth + bits - 1) / bits;
  const int full_depth = digits * bits;
  if (full_depth > max_key_depth(dim)) throw Error("depth out of range");
  std::vector<CellMass> cur{CellMass{0, 1.0}};
  for (int d = 0; d < digits; ++d) {
    std::vector<CellMass> next;
    next.reserve(cur.size() * nd);
    for (const auto& c : cur) {
      for (std::size_t v = 0; v < nd; ++v) {
        if (weights[v] > 0.0) next.push_back(CellMass{(c.key << (dim * bits)) | v, c.mass * weights[v]});
      }
    }
    cur = std::move(next);
  }
  TreeMeasure full = from_leaves(dim, full_depth, std::move(cur));
  return full_depth == depth ? full : full.truncated(depth);
}

TreeMeasure TreeMeasure::bernoulli(double p, int depth) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("Bernoulli parameter outside [0,1]");
  const double w[2] = {p, 1.0 - p};
  return digit_measure(1, 1, std::span<const double>(w, 2), depth);
}

TreeMeasure TreeMeasure::mixture(std::span<const TreeMeasure> parts, std::span<const double> q) {
  if (parts.empty() || parts.size() != q.size()) throw Error("mixture size mismatch");
  const int dim = parts[0].dim();
  const int depth = parts[0].max_depth();
  std::vector<CellMass> leaves;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].dim() != dim || parts[i].max_depth() != depth) throw Error("mixture shape mismatch");
    for (const auto& c : parts[i].level(depth)) leaves.push_back(CellMass{c.key, q[i] * c.mass});
  }
  return from_leaves(dim, depth, std::move(leaves));
}

double TreeMeasure::total_mass() const {
  if (levels_.empty() || levels_[0].empty()) return 0.0;
  return levels_[0][0].mass;
}

std::span<const CellMass> TreeMeasure::level(int k) const {
  if (k < 0 || k > depth_) throw Error("insufficient resolution");
  return levels_[k];
}

double TreeMeasure::mass(int depth, std::uint64_t key) const {
  const auto lv = level(depth);
  auto it = std::lower_bound(lv.begin(), lv.end(), key,
                             [](const CellMass& c, std::uint64_t k) { return c.key < k; });
  return (it != lv.end() && it->key == key) ? it->mass : 0.0;
}

double TreeMeasure::mass(const DyadicCell& cell) const {
  if (cell.dim != dim_) throw Error("dimension mismatch");
  if (cell.depth > depth_) throw Error("insufficient resolution");
  const std::int64_t limit = std::int64_t{1} << cell.depth;
  for (int i = 0; i < dim_; ++i) {
    if (cell.coords[i] < 0 || cell.coords[i] >= limit) return 0.0;
  }
  return mass(cell.depth, morton_key(cell));
}

std::pair<std::size_t, std::size_t> TreeMeasure::descendant_range(int coarse, std::uint64_t key,
                                                                  int finer) const {
  const auto lv = level(finer);
  const int shift = dim_ * (finer - coarse);
  const std::uint64_t lo = key << shift;
  const std::uint64_t hi = (key + 1) << shift;
  auto cmp = [](const CellMass& c, std::uint64_t k) { return c.key < k; };
  const auto first = std::lower_bound(lv.begin(), lv.end(), lo, cmp);
  const auto last = std::lower_bound(first, lv.end(), hi, cmp);
  return {static_cast<std::size_t>(first - lv.begin()), static_cast<std::size_t>(last - lv.begin())};
}

TreeMeasure TreeMeasure::component(const DyadicCell& cell) const {
  if (cell.depth > depth_) throw Error("insufficient resolution");
  const double m = mass(cell);
  if (!(m > 0.0)) throw Error("empty component");
  const std::uint64_t key = morton_key(cell);
  std::vector<std::vector<CellMass>> out(depth_ - cell.depth + 1);
  for (int k = cell.depth; k <= depth_; ++k) {
    const auto [first, last] = descendant_range(cell.depth, key, k);
    const std::uint64_t base = key << (dim_ * (k - cell.depth));
    auto& dst = out[k - cell.depth];
    dst.reserve(last - first);
    const auto lv = level(k);
    for (std::size_t i = first; i < last; ++i) dst.push_back(CellMass{lv[i].key - base, lv[i].mass / m});
  }
  return from_levels(dim_, std::move(out));
}

TreeMeasure TreeMeasure::truncated(int depth) const {
  if (depth > depth_) throw Error("insufficient resolution");
  std::vector<std::vector<CellMass>> out(levels_.begin(), levels_.begin() + depth + 1);
  return from_levels(dim_, std::move(out));
}

TreeMeasure TreeMeasure::normalized() const {
  const double m = total_mass();
  if (!(m > 0.0)) throw Error("empty component");
  auto out = levels_;
  for (auto& lv : out)
    for (auto& c : lv) c.mass /= m;
  return from_levels(dim_, std::move(out));
}

double TreeMeasure::consistency_defect() const {
  double worst = 0.0;
  for (int k = 0; k < depth_; ++k) {
    const auto& coarse = levels_[k];
    const auto& fine = levels_[k + 1];
    std::size_t j = 0;
    for (const auto& c : coarse) {
      double s = 0.0;
      while (j < fine.size() && (fine[j].key >> dim_) < c.key) {
        // orphan child: its parent is missing from the coarse level
        worst = std::max(worst, 1.0);
        ++j;
      }
      while (j < fine.size() && (fine[j].key >> dim_) == c.key) s += fine[j++].mass;
      const double scale = std::max(c.mass, 1e-300);
      worst = std::max(worst, std::abs(s - c.mass) / scale);
    }
    if (j != fine.size()) worst = std::max(worst, 1.0);
  }
  for (const auto& lv : levels_)
    for (const auto& c : lv)
      if (c.mass < 0.0) worst = std::max(worst, 1.0);
  return worst;
}

// ---------------------------------------------------------------------------

CellHistogram CellHistogram::from_tree(const TreeMeasure& mu, int depth) {
  CellHistogram h;
  h.dim = mu.dim();
  h.depth = depth;
  for (const auto& c : mu.level(depth)) {
    const DyadicCell cell = cell_from_key(mu.dim(), depth, c.key);
    h.cells.push_back({cell.coords, c.mass});
  }
  h.canonicalize();
  return h;
}

void CellHistogram::canonicalize() {
  std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < cells.size();) {
    std::size_t j = i;
    double m = 0.0;
    while (j < cells.size() && cells[j].first == cells[i].first) m += cells[j++].second;
    if (m > 0.0) cells[out++] = {cells[i].first, m};
    i = j;
  }
  cells.resize(out);
}

double CellHistogram::total_mass() const {
  double s = 0.0;
  for (const auto& c : cells) s += c.second;
  return s;
}

double CellHistogram::entropy(int k) const {
  if (k > depth || k < 0) throw Error("insufficient resolution");
  CellHistogram coarse;
  coarse.dim = dim;
  coarse.depth = k;
  coarse.cells.reserve(cells.size());
  const int shift = depth - k;
  for (const auto& [c, m] : cells) {
    std::array<std::int64_t, 2> cc{c[0] >> shift, dim == 2 ? (c[1] >> shift) : 0};
    coarse.cells.push_back({cc, m});
  }
  coarse.canonicalize();
  double h = 0.0;
  for (const auto& c : coarse.cells) h -= c.second * std::log2(c.second);
  return h;
}

CellHistogram translate_rebin(const CellHistogram& h, std::span<const double> shift) {
  if (static_cast<int>(shift.size()) != h.dim) throw Error("shift dimension mismatch");
  std::array<std::int64_t, 2> q{0, 0};
  std::array<double, 2> f{0.0, 0.0};
  for (int i = 0; i < h.dim; ++i) {
    const double u = std::ldexp(shift[i], h.depth);
    const double fl = std::floor(u);
    q[i] = static_cast<std::int64_t>(fl);
    f[i] = u - fl;
  }
  CellHistogram out;
  out.dim = h.dim;
  out.depth = h.depth;
  const int corners = 1 << h.dim;
  for (const auto& [c, m] : h.cells) {
    for (int corner = 0; corner < corners; ++corner) {
      double w = m;
      std::array<std::int64_t, 2> cc{0, 0};
      for (int i = 0; i < h.dim; ++i) {
        const int bit = (corner >> i) & 1;
        w *= bit ? f[i] : 1.0 - f[i];
        cc[i] = c[i] + q[i] + bit;
      }
      if (w > 0.0) out.cells.push_back({cc, w});
    }
  }
  out.canonicalize();
  return out;
}

}  // namespace dyadlab
