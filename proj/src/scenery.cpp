#include "dyadlab/scenery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_map>

#include "dyadlab/entropy.hpp"
#include "dyadlab/error.hpp"
#include "dyadlab/kernels.hpp"

namespace dyadlab {

std::shared_ptr<const MeasureSource> MeasureSource::fixed(TreeMeasure mu, std::string name) {
  if (mu.dim() < 1 || mu.dim() > 2) throw Error("dimension must be 1 or 2");
  auto s = std::make_shared<MeasureSource>();
  s->dim_ = mu.dim();
  s->bits_ = 0;
  s->name_ = std::move(name);
  s->fixed_ = mu.normalized();
  return s;
}

std::shared_ptr<const MeasureSource> MeasureSource::digit(int dim, int bits, std::vector<double> weights,
                                                          int window, std::string name) {
  if (dim < 1 || dim > 2) throw Error("dimension must be 1 or 2");
  if (bits < 1 || dim * bits > 8) throw Error("digit block too large");
  if (window < 1 || window + bits > max_key_depth(dim)) throw Error("window depth out of range");
  auto s = std::make_shared<MeasureSource>();
  s->dim_ = dim;
  s->bits_ = bits;
  s->name_ = std::move(name);
  // One window per partial digit block: by self-similarity the component at
  // absolute depth q*bits + r depends only on the last r binary digits.
  const TreeMeasure base = TreeMeasure::digit_measure(dim, bits, weights, window + bits - 1);
  s->windows_.resize(bits);
  for (int r = 0; r < bits; ++r) {
    const std::uint64_t cells = std::uint64_t{1} << (dim * r);
    s->windows_[r].resize(cells);
    for (std::uint64_t key = 0; key < cells; ++key) {
      const DyadicCell c = cell_from_key(dim, r, key);
      if (base.mass(c) > 0.0) s->windows_[r][key] = base.component(c).truncated(window);
    }
  }
  return s;
}

std::shared_ptr<const MeasureSource> MeasureSource::bernoulli(double p, int window) {
  if (!(p > 0.0 && p < 1.0)) throw Error("p must lie in (0,1)");
  const double w[2] = {p, 1.0 - p};
  return digit(1, 1, {w[0], w[1]}, window, "bernoulli");
}

std::shared_ptr<const MeasureSource> MeasureSource::lebesgue(int dim, int window) {
  return digit(dim, 1, std::vector<double>(std::size_t{1} << dim, 1.0 / (1 << dim)), window, "lebesgue");
}

const TreeMeasure& MeasureSource::initial() const { return bits_ ? windows_[0][0] : fixed_; }

const TreeMeasure& MeasureSource::window(int phase_depth, std::uint64_t phase_key) const {
  if (!bits_) return fixed_;
  if (phase_depth < 0 || phase_depth >= bits_ || phase_key >= windows_[phase_depth].size())
    throw Error("phase out of range");
  const TreeMeasure& w = windows_[phase_depth][phase_key];
  if (w.max_depth() == 0) throw Error("zero-mass cell");
  return w;
}

// ---- magnification ---------------------------------------------------------------

SceneryState make_state(const std::shared_ptr<const MeasureSource>& src, std::vector<double> point) {
  if (!src) throw Error("missing measure source");
  if (static_cast<int>(point.size()) != src->dim()) throw Error("point dimension mismatch");
  for (double v : point)
    if (!(v >= 0.0 && v < 1.0)) throw Error("point outside unit cube");
  SceneryState s;
  s.measure = src->initial();
  s.remaining_depth = s.measure.max_depth();
  if (s.measure.mass(cell_of_point(point, s.remaining_depth)) <= 0.0) throw Error("zero-mass cell");
  s.point = std::move(point);
  if (src->replenishable()) s.source = src;
  return s;
}

SceneryState magnify(const SceneryState& state) {
  if (state.remaining_depth < 1) throw Error("exhausted budget");
  const int dim = state.measure.dim();
  const DyadicCell c = cell_of_point(state.point, 1);
  if (!(state.measure.mass(c) > 0.0)) throw Error("zero-mass cell");
  SceneryState out;
  out.point.resize(dim);
  for (int i = 0; i < dim; ++i) out.point[i] = 2.0 * state.point[i] - static_cast<double>(c.coords[i]);
  if (state.source) {
    const std::uint64_t child = morton_key(c);
    out.source = state.source;
    out.phase_depth = state.phase_depth + 1;
    out.phase_key = (state.phase_key << dim) | child;
    if (out.phase_depth == state.source->bits()) {
      out.phase_depth = 0;
      out.phase_key = 0;
    }
    out.measure = state.source->window(out.phase_depth, out.phase_key);
    out.remaining_depth = out.measure.max_depth();
  } else {
    out.measure = state.measure.component(c);
    out.remaining_depth = state.remaining_depth - 1;
  }
  return out;
}

// ---- orbits ----------------------------------------------------------------------

namespace {

double uniform01(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

// Next Morton digit below the cell reached by `prefix`, drawn by mass.
std::uint32_t draw_digit(const TreeMeasure& mu, int depth, std::uint64_t prefix, std::mt19937_64& gen) {
  const auto [first, last] = mu.descendant_range(depth, prefix, depth + 1);
  const auto lv = mu.level(depth + 1);
  double total = 0.0;
  for (std::size_t i = first; i < last; ++i) total += lv[i].mass;
  if (!(total > 0.0)) throw Error("zero-mass cell");
  double target = uniform01(gen) * total;
  std::size_t pick = last - 1;
  for (std::size_t i = first; i < last; ++i) {
    if (target < lv[i].mass) {
      pick = i;
      break;
    }
    target -= lv[i].mass;
  }
  return static_cast<std::uint32_t>(lv[pick].key - (prefix << mu.dim()));
}

std::vector<double> point_from_digits(const std::vector<std::uint32_t>& digits, std::size_t from, int dim) {
  std::vector<double> x(dim, 0.0);
  const std::size_t count = std::min<std::size_t>(digits.size() - from, 52);
  for (int i = 0; i < dim; ++i) {
    double scale = 0.5;
    for (std::size_t j = 0; j < count; ++j, scale *= 0.5)
      if ((digits[from + j] >> i) & 1U) x[i] += scale;
  }
  return x;
}

// Extends `digits[from..]` to the full depth of the current window.
void extend_digits(const TreeMeasure& mu, std::vector<std::uint32_t>& digits, std::size_t from,
                   std::mt19937_64& gen) {
  const int dim = mu.dim();
  std::uint64_t prefix = 0;
  int depth = 0;
  for (std::size_t j = from; j < digits.size() && depth < mu.max_depth(); ++j, ++depth)
    prefix = (prefix << dim) | digits[j];
  while (depth < mu.max_depth() && depth < 52) {
    const std::uint32_t d = draw_digit(mu, depth, prefix, gen);
    digits.push_back(d);
    prefix = (prefix << dim) | d;
    ++depth;
  }
}

}  // namespace

CesaroStats scenery_orbit(const std::shared_ptr<const MeasureSource>& src, std::optional<std::vector<double>> x,
                          std::size_t steps, int l, std::uint64_t seed) {
  if (!src) throw Error("missing measure source");
  if (l < 1) throw Error("l must be positive");
  CesaroStats st;
  st.steps = steps;
  st.l = l;
  st.seed = seed;
  std::mt19937_64 gen(seed);
  std::vector<std::uint32_t> digits;
  std::size_t head = 0;
  SceneryState s;
  if (x) {
    s = make_state(src, *x);
  } else {
    extend_digits(src->initial(), digits, 0, gen);
    s = make_state(src, point_from_digits(digits, 0, src->dim()));
  }
  double sum = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    const std::uint32_t d = static_cast<std::uint32_t>(morton_key(cell_of_point(s.point, 1)));
    s = magnify(s);
    if (!x) {
      ++head;
      extend_digits(s.measure, digits, head, gen);
      s.point = point_from_digits(digits, head, src->dim());
      // Keep the buffer short; only the unread tail matters.
      if (head > 4096) {
        digits.erase(digits.begin(), digits.begin() + static_cast<std::ptrdiff_t>(head));
        head = 0;
      }
    }
    const double v = shannon_entropy(s.measure, l).entropy_bits / l;
    sum += v;
    st.digits.push_back(d);
    st.values.push_back(v);
    st.running_mean.push_back(sum / static_cast<double>(k));
  }
  return st;
}

std::vector<CesaroStats> scenery_orbits(const std::shared_ptr<const MeasureSource>& src, std::size_t count,
                                        std::size_t steps, int l, std::uint64_t seed) {
  std::vector<CesaroStats> out(count);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      out[i] = scenery_orbit(src, std::nullopt, steps, l, seed + static_cast<std::uint64_t>(i));
    } catch (const std::exception& e) {
#pragma omp critical(dyadlab_orbit_error)
      if (failure.empty()) failure = e.what();
    }
  }
  if (!failure.empty()) throw Error(failure);
  return out;
}

double pooled_mean(const std::vector<CesaroStats>& runs) {
  std::vector<double> means;
  std::size_t total = 0;
  for (const auto& r : runs) total += r.steps;
  if (total == 0) return 0.0;
  double s = 0.0;
  // Sorted summands make the result independent of run order.
  for (const auto& r : runs) means.push_back(r.mean() * static_cast<double>(r.steps));
  std::sort(means.begin(), means.end());
  for (double m : means) s += m;
  return s / static_cast<double>(total);
}

// ---- uniform entropy dimension -----------------------------------------------------

UniformEntropyResult uniform_entropy_statistic(const TreeMeasure& mu, int n, int l, double eps, double alpha,
                                               std::size_t samples, std::uint64_t seed) {
  if (n < 1 || l < 1) throw Error("n and l must be positive");
  if (n + l > mu.max_depth()) throw Error("insufficient resolution");
  if (mu.dim() == 2 && n > 31) throw Error("insufficient resolution");
  const double total = mu.total_mass();
  if (!(total > 0.0)) throw Error("empty measure");
  const double band = l * eps;
  const double need = n * (1.0 - eps);
  UniformEntropyResult res;

  auto good_share = [&](std::uint64_t leaf_key, auto&& entropy_at) {
    int good = 0;
    for (int k = 1; k <= n; ++k) {
      const std::uint64_t key = leaf_key >> (mu.dim() * (n - k));
      if (std::abs(entropy_at(k, key) - l * alpha) <= band) ++good;
    }
    return static_cast<double>(good) >= need;
  };

  if (samples == 0) {
    // Component entropies of every cell at depths 1..n, computed level by level.
    std::vector<std::vector<double>> ent(n + 1);
    for (int k = 1; k <= n; ++k) {
      const auto lv = mu.level(k);
      ent[k].resize(lv.size());
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(lv.size()); ++i)
        ent[k][i] = component_entropy(mu, k, lv[i].key, l);
    }
    auto entropy_at = [&](int k, std::uint64_t key) {
      const auto lv = mu.level(k);
      const auto it = std::lower_bound(lv.begin(), lv.end(), key,
                                       [](const CellMass& c, std::uint64_t v) { return c.key < v; });
      return ent[k][static_cast<std::size_t>(it - lv.begin())];
    };
    const auto leaves = mu.level(n);
    std::vector<double> good_mass(leaves.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(leaves.size()); ++i)
      if (good_share(leaves[i].key, entropy_at)) good_mass[i] = leaves[i].mass / total;
    double s = 0.0;
    for (double m : good_mass) s += m;
    res.fraction = s;
    res.exhaustive = true;
    res.points = leaves.size();
    return res;
  }

  std::mt19937_64 gen(seed);
  std::map<std::pair<int, std::uint64_t>, double> cache;
  auto entropy_at = [&](int k, std::uint64_t key) {
    auto [it, fresh] = cache.try_emplace({k, key}, 0.0);
    if (fresh) it->second = component_entropy(mu, k, key, l);
    return it->second;
  };
  std::size_t good = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto x = mu.sample([&] { return uniform01(gen); });
    const std::uint64_t leaf = morton_key(cell_of_point(x, n));
    if (good_share(leaf, entropy_at)) ++good;
  }
  res.fraction = static_cast<double>(good) / static_cast<double>(samples);
  res.exhaustive = false;
  res.points = samples;
  return res;
}

// ---- dyadic spreading ----------------------------------------------------------------

std::vector<double> default_translations() {
  std::vector<double> t{0.0};
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int j = 1; j <= 16; ++j) {
    const double v = j * g;
    t.push_back(v - std::floor(v));
  }
  return t;
}

namespace {

struct CandidateResult {
  double good_mass = 0.0;
  std::vector<SpreadingPoint> points;
};

CandidateResult evaluate_candidate(const CellHistogram& base, int n, int l, double eps, double t) {
  const int depth = n + l;
  const double shift[1] = {t};
  const CellHistogram h = t == 0.0 ? base : translate_rebin(base, shift);
  const double total = h.total_mass();
  // Mass of the depth-k ancestor of each fine cell.
  auto ancestors = [&](int k) {
    std::vector<double> a(h.cells.size());
    const int sh = depth - k;
    for (std::size_t i = 0; i < h.cells.size();) {
      std::size_t j = i;
      double m = 0.0;
      const std::int64_t c = h.cells[i].first[0] >> sh;
      while (j < h.cells.size() && (h.cells[j].first[0] >> sh) == c) m += h.cells[j++].second;
      std::fill(a.begin() + static_cast<std::ptrdiff_t>(i), a.begin() + static_cast<std::ptrdiff_t>(j), m);
      i = j;
    }
    return a;
  };
  std::vector<int> bad(h.cells.size(), 0);
  for (int k = 1; k <= n; ++k) {
    const auto coarse = ancestors(k), fine = ancestors(k + l);
    for (std::size_t i = 0; i < bad.size(); ++i)
      if (coarse[i] <= 2.0 * fine[i] * (1.0 + 1e-12)) ++bad[i];
  }
  CandidateResult r;
  std::vector<double> good;
  for (std::size_t i = 0; i < h.cells.size(); ++i) {
    const double frac = static_cast<double>(bad[i]) / n;
    const double m = h.cells[i].second / total;
    r.points.push_back(SpreadingPoint{h.cells[i].first[0], m, frac});
    if (frac < eps) good.push_back(m);
  }
  for (double m : good) r.good_mass += m;
  return r;
}

}  // namespace

SpreadingReport spreading_check(const TreeMeasure& eta, int n, int l, double eps,
                                const std::vector<double>& translations) {
  if (eta.dim() != 1) throw Error("spreading needs a measure on the line");
  if (n < 1 || l < 1) throw Error("n and l must be positive");
  if (n + l > eta.max_depth()) throw Error("insufficient resolution");
  if (translations.empty()) throw Error("no candidate translations");
  const CellHistogram base = CellHistogram::from_tree(eta, n + l);
  if (!(base.total_mass() > 0.0)) throw Error("empty measure");
  std::vector<CandidateResult> res(translations.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(translations.size()); ++i)
    res[i] = evaluate_candidate(base, n, l, eps, translations[i]);
  SpreadingReport rep;
  rep.n = n;
  rep.l = l;
  rep.eps = eps;
  std::size_t pick = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    rep.candidate_good_mass.push_back(res[i].good_mass);
    if (!rep.spreading && res[i].good_mass > 1.0 - eps) {
      rep.spreading = true;
      pick = i;
    }
  }
  rep.translation = translations[pick];
  rep.good_mass = res[pick].good_mass;
  rep.points = std::move(res[pick].points);
  return rep;
}

}  // namespace dyadlab
