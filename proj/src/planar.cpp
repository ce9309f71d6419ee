#include "dyadlab/planar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "atom_builder.hpp"
#include "dyadlab/entropy.hpp"
#include "dyadlab/error.hpp"

namespace dyadlab {

using boost::multiprecision::cpp_int;

PlanarIFS::PlanarIFS(std::vector<PlanarMap> maps, std::vector<double> weights)
    : maps_(std::move(maps)), weights_(std::move(weights)) {
  if (maps_.empty()) throw Error("empty IFS");
  if (maps_.size() != weights_.size()) throw Error("weights size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    if (!(maps_[i].r > 0.0 && maps_[i].r < 1.0)) throw Error("planar ratio must lie in (0,1)");
    if (!(weights_[i] > 0.0)) throw Error("weights must be positive");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("weights must sum to 1");
}

double PlanarIFS::similarity_dimension() const {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    num += weights_[i] * std::log(weights_[i]);
    den += weights_[i] * std::log(maps_[i].r);
  }
  return num / den;
}

std::array<std::pair<double, double>, 2> PlanarIFS::hull() const {
  // Homotheties with positive ratio act on each axis separately.
  std::array<std::pair<double, double>, 2> box;
  for (int a = 0; a < 2; ++a) {
    std::vector<AffineContraction> axis;
    for (const auto& m : maps_) axis.push_back(AffineContraction{m.r, m.t[a]});
    box[a] = WeightedIFS::uniform(axis).hull();
  }
  return box;
}

PlanarIFS four_corner_ifs() {
  std::vector<PlanarMap> maps;
  for (auto [a, b] : {std::pair{0, 0}, std::pair{3, 0}, std::pair{0, 3}, std::pair{3, 3}}) {
    maps.push_back(PlanarMap{0.25, {a / 4.0, b / 4.0}});
  }
  return PlanarIFS(std::move(maps), {0.25, 0.25, 0.25, 0.25});
}

// ---- Direction -----------------------------------------------------------------

namespace {

Rational frac_mod1(const Rational& q) {
  const cpp_int num = numerator(q), den = denominator(q);
  cpp_int r = num % den;
  if (r < 0) r += den;
  return Rational(r, den);
}

}  // namespace

Direction Direction::from_angle(double theta) {
  Direction d;
  double t = std::fmod(theta, std::numbers::pi);
  if (t < 0) t += std::numbers::pi;
  if (t >= std::numbers::pi) t = 0.0;
  d.theta_ = t;
  return d;
}

Direction Direction::from_pi_fraction(const Rational& q) {
  const Rational f = frac_mod1(q);
  const Rational quarters = f * 4;
  if (denominator(quarters) == 1) {
    static const int vx[4] = {1, 1, 0, -1};
    static const int vy[4] = {0, 1, 1, 1};
    const int i = static_cast<int>(numerator(quarters));
    Direction d = from_vector(vx[i], vy[i]);
    d.frac_ = f;
    return d;
  }
  Direction d;
  d.frac_ = f;
  d.theta_ = static_cast<double>(f) * std::numbers::pi;
  return d;
}

Direction Direction::from_vector(const Rational& vx, const Rational& vy) {
  if (vx == 0 && vy == 0) throw Error("degenerate pair");
  Rational x = vx, y = vy;
  if (y < 0 || (y == 0 && x < 0)) {
    x = -x;
    y = -y;
  }
  Direction d;
  d.vec_ = std::array<Rational, 2>{x, y};
  d.theta_ = std::atan2(static_cast<double>(y), static_cast<double>(x));
  if (d.theta_ >= std::numbers::pi) d.theta_ = 0.0;
  return d;
}

std::array<double, 2> Direction::unit() const {
  if (vec_) {
    const double x = static_cast<double>((*vec_)[0]);
    const double y = static_cast<double>((*vec_)[1]);
    const double n = std::hypot(x, y);
    return {x / n, y / n};
  }
  if (frac_) {
    const Rational f = *frac_;
    const Rational q(1, 4), h(1, 2), tq(3, 4);
    auto cs = [](const Rational& g) {
      const double a = static_cast<double>(g) * std::numbers::pi;
      return std::array<double, 2>{std::cos(a), std::sin(a)};
    };
    if (f <= q) return cs(f);
    if (f <= h) {
      const auto b = cs(h - f);
      return {b[1], b[0]};
    }
    if (f <= tq) {
      const auto b = cs(f - h);
      return {-b[1], b[0]};
    }
    const auto b = cs(Rational(1) - f);
    return {-b[0], b[1]};
  }
  return {std::cos(theta_), std::sin(theta_)};
}

double Direction::project(double x, double y) const {
  const auto u = unit();
  return u[0] * x + u[1] * y;
}

std::string Direction::to_string() const {
  std::ostringstream os;
  if (frac_) {
    os << *frac_ << "*pi";
  } else if (vec_) {
    os << "atan2(" << (*vec_)[1] << "," << (*vec_)[0] << ")";
  } else {
    os.precision(17);
    os << theta_;
  }
  return os.str();
}

Direction coincidence_direction(std::array<double, 2> t1, std::array<double, 2> t2) {
  const Rational dx = Rational(t1[0]) - Rational(t2[0]);
  const Rational dy = Rational(t1[1]) - Rational(t2[1]);
  if (dx == 0 && dy == 0) throw Error("degenerate pair");
  // (cos, sin) orthogonal to (dx, dy): theta = atan2(dx, -dy) mod pi.
  return Direction::from_vector(-dy, dx);
}

// ---- projection ------------------------------------------------------------------

ProjectedIFS project_ifs(const PlanarIFS& ifs, const Direction& dir, double tol) {
  struct Item {
    double r;
    double s;
    Rational exact_s;  // v . t, only meaningful on the exact path
    double p;
  };
  const bool exact = dir.exact();
  const auto u = dir.unit();
  std::vector<Item> items;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const auto& m = ifs.maps()[i];
    Item it{m.r, u[0] * m.t[0] + u[1] * m.t[1], Rational(0), ifs.weights()[i]};
    if (exact) {
      const auto& v = *dir.vector();
      it.exact_s = v[0] * Rational(m.t[0]) + v[1] * Rational(m.t[1]);
    }
    items.push_back(it);
  }
  std::sort(items.begin(), items.end(), [&](const Item& a, const Item& b) {
    if (exact && a.exact_s != b.exact_s) return a.exact_s < b.exact_s;
    if (!exact && a.s != b.s) return a.s < b.s;
    return a.r < b.r;
  });
  ProjectedIFS out;
  out.exact_merge = exact;
  std::vector<AffineContraction> maps;
  std::vector<double> weights;
  for (std::size_t i = 0; i < items.size(); ++i) {
    bool merge = false;
    if (!maps.empty()) {
      const Item& prev = items[i - 1];
      if (items[i].r == prev.r) {
        if (exact) {
          merge = items[i].exact_s == prev.exact_s;
        } else if (std::abs(items[i].s - maps.back().s) <= tol) {
          merge = true;
          if (items[i].s != maps.back().s) ++out.near_merges;
        }
      }
    }
    if (merge) {
      weights.back() += items[i].p;
      ++out.merged_maps;
    } else {
      maps.push_back(AffineContraction{items[i].r, items[i].s});
      weights.push_back(items[i].p);
    }
  }
  out.ifs = WeightedIFS(std::move(maps), std::move(weights));
  return out;
}

PlanarTree build_planar_tree(const PlanarIFS& ifs, int n, const BuildOptions& opt) {
  if (n < 0 || n > 31) throw Error("depth out of range");
  std::vector<detail::AtomMap> am;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const auto& m = ifs.maps()[i];
    am.push_back(detail::AtomMap{m.r, m.t, ifs.weights()[i], -std::log2(m.r)});
  }
  const double stop = static_cast<double>(n + opt.guard);
  const std::uint64_t words = detail::count_words(am, stop, opt.budget + 1);
  if (words > opt.budget) throw Error("budget exceeded");
  const auto box = ifs.hull();
  const double width = std::max(box[0].second - box[0].first, box[1].second - box[1].first);
  PlanarTree out;
  out.offset = {box[0].first, box[1].first};
  out.scale = width > 0 ? 1.0 / width : 1.0;
  out.words = words;
  detail::AtomSpec spec;
  spec.dim = 2;
  spec.depth = n;
  spec.stop = stop;
  const auto& m0 = ifs.maps()[0];
  spec.x0 = {m0.t[0] / (1.0 - m0.r), m0.t[1] / (1.0 - m0.r)};
  spec.scale = out.scale;
  spec.offset = out.offset;
  out.measure = detail::build_atoms_parallel(am, spec);
  return out;
}

namespace {

std::size_t greedy_cover(std::vector<std::pair<double, double>>& iv, double delta) {
  std::sort(iv.begin(), iv.end());
  const double eps = 1e-9 * delta;
  std::size_t count = 0;
  double covered = -std::numeric_limits<double>::infinity();
  for (const auto& [a, b] : iv) {
    // Pieces longer than delta need several intervals.
    double start = std::max(a, covered);
    while (b > covered + eps) {
      if (start > covered) covered = start;
      covered += delta;
      ++count;
      start = covered;
    }
  }
  return count;
}

}  // namespace

std::size_t interval_cover_count(const WeightedIFS& ifs, int level, double delta) {
  if (level < 0) throw Error("negative level");
  if (!(delta > 0.0)) throw Error("delta must be positive");
  const double cnt = std::pow(static_cast<double>(ifs.size()), level);
  if (cnt > static_cast<double>(kDefaultWordBudget)) throw Error("budget exceeded");
  const Conjugation c = hull_conjugation(ifs);
  const auto [lo, hi] = ifs.hull();
  std::vector<std::pair<double, double>> iv{{c.to_unit(lo), c.to_unit(hi)}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::pair<double, double>> next;
    next.reserve(iv.size() * ifs.size());
    // Apply the conjugated maps to each piece: g_i(y) = r_i y + c_i.
    for (const auto& m : ifs.maps()) {
      const double ci = c.to_unit(m(c.from_unit(0.0)));
      for (const auto& [a, b] : iv) {
        const double x = m.r * a + ci, y = m.r * b + ci;
        next.emplace_back(std::min(x, y), std::max(x, y));
      }
    }
    iv = std::move(next);
  }
  return greedy_cover(iv, delta);
}

namespace {

std::size_t interval_cover_stopping(const WeightedIFS& ifs, int n) {
  const Conjugation c = hull_conjugation(ifs);
  const auto [lo, hi] = ifs.hull();
  std::vector<std::pair<double, double>> iv;
  for (const auto& w : stopping_words(ifs, n)) {
    const double a = c.to_unit(w.apply(lo)), b = c.to_unit(w.apply(hi));
    iv.emplace_back(std::min(a, b), std::max(a, b));
  }
  return greedy_cover(iv, std::ldexp(1.0, -n));
}

}  // namespace

std::vector<DirectionRow> direction_scan(const PlanarIFS& ifs, const std::vector<Direction>& dirs, int n,
                                         const BuildOptions& opt) {
  if (dirs.empty()) throw Error("empty direction grid");
  std::vector<DirectionRow> rows(dirs.size());
  std::string failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(dirs.size()); ++i) {
    try {
      const ProjectedIFS p = project_ifs(ifs, dirs[i]);
      const IfsTree tree = build_tree_measure(p.ifs, n, opt);
      DirectionRow row;
      row.theta = dirs[i].theta();
      row.depth = n;
      row.h_over_n = shannon_entropy(tree.measure, n).normalized;
      row.cover_count = covering_number(tree.measure, n);
      row.interval_cover = interval_cover_stopping(p.ifs, n);
      row.merged_map_count = p.ifs.size();
      rows[i] = row;
    } catch (const std::exception& e) {
#pragma omp critical(dyadlab_scan_error)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw Error(failure);
  return rows;
}

AssouadEstimate assouad_estimate(const TreeMeasure& support, int k, int m) {
  if (m < 1) throw Error("m must be at least 1");
  if (k < 0 || k + m > support.max_depth()) throw Error("insufficient resolution");
  const auto coarse = support.level(k);
  if (coarse.empty()) throw Error("empty set");
  AssouadEstimate out;
  out.k = k;
  out.m = m;
  for (const auto& c : coarse) {
    const auto [first, last] = support.descendant_range(k, c.key, k + m);
    const double ratio = std::log2(static_cast<double>(last - first)) / m;
    out.ratios.emplace_back(cell_from_key(support.dim(), k, c.key), ratio);
    out.estimate = std::max(out.estimate, ratio);
  }
  return out;
}

namespace {

// Range of pi over the unit square corners for unit vector u.
std::pair<double, double> square_range(double ux, double uy) {
  const double v[4] = {0.0, ux, uy, ux + uy};
  return {*std::min_element(v, v + 4), *std::max_element(v, v + 4)};
}

TreeMeasure bin_1d(const std::map<std::int64_t, double>& acc, int n) {
  std::vector<CellMass> leaves;
  for (const auto& [k, m] : acc) leaves.push_back(CellMass{static_cast<std::uint64_t>(k), m});
  return TreeMeasure::from_leaves(1, n, std::move(leaves));
}

}  // namespace

TreeMeasure strip_conditional(const TreeMeasure& mu, const Direction& dir, double x, int w) {
  if (mu.dim() != 2) throw Error("strip conditional needs a planar measure");
  const int n = mu.max_depth();
  const auto u = dir.unit();
  const double width = std::ldexp(1.0, -w);
  const auto [olo, ohi] = square_range(-u[1], u[0]);
  const double side = std::ldexp(1.0, -n);
  const std::int64_t ncell = std::int64_t{1} << n;
  std::map<std::int64_t, double> acc;
  double total = 0.0;
  for (const auto& c : mu.level(n)) {
    const DyadicCell cell = cell_from_key(2, n, c.key);
    const double cx = (static_cast<double>(cell.coords[0]) + 0.5) * side;
    const double cy = (static_cast<double>(cell.coords[1]) + 0.5) * side;
    const double p = u[0] * cx + u[1] * cy;
    if (!(p >= x && p < x + width)) continue;
    const double o = (-u[1] * cx + u[0] * cy - olo) / (ohi - olo);
    const auto j = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(std::ldexp(o, n))), 0, ncell - 1);
    acc[j] += c.mass;
    total += c.mass;
  }
  if (!(total > 0.0)) throw Error("empty component");
  for (auto& [k, m] : acc) m /= total;
  return bin_1d(acc, n);
}

TreeMeasure project_tree(const TreeMeasure& mu, const Direction& dir) {
  if (mu.dim() != 2) throw Error("projection needs a planar measure");
  const int n = mu.max_depth();
  const auto u = dir.unit();
  const auto [lo, hi] = square_range(u[0], u[1]);
  const double side = std::ldexp(1.0, -n);
  const std::int64_t ncell = std::int64_t{1} << n;
  std::map<std::int64_t, double> acc;
  for (const auto& c : mu.level(n)) {
    const DyadicCell cell = cell_from_key(2, n, c.key);
    const double cx = (static_cast<double>(cell.coords[0]) + 0.5) * side;
    const double cy = (static_cast<double>(cell.coords[1]) + 0.5) * side;
    const double p = (u[0] * cx + u[1] * cy - lo) / (hi - lo);
    acc[std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(std::ldexp(p, n))), 0, ncell - 1)] += c.mass;
  }
  return bin_1d(acc, n);
}

}  // namespace dyadlab
