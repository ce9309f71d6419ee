#include "dyadlab/ifs.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "atom_builder.hpp"
#include "dyadlab/error.hpp"

namespace dyadlab {

WeightedIFS::WeightedIFS(std::vector<AffineContraction> maps, std::vector<double> weights)
    : maps_(std::move(maps)), weights_(std::move(weights)) {
  if (maps_.empty()) throw Error("empty IFS");
  if (maps_.size() != weights_.size()) throw Error("weights size mismatch");
  if (maps_.size() > 255) throw Error("alphabet too large");
  double total = 0.0;
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    const double r = maps_[i].r;
    if (!(std::abs(r) < 1.0) || r == 0.0 || !std::isfinite(maps_[i].s)) {
      throw Error("map " + std::to_string(i) + " is not a contraction");
    }
    if (!(weights_[i] > 0.0)) throw Error("weights must be positive");
    total += weights_[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("weights must sum to 1");
}

WeightedIFS WeightedIFS::uniform(std::vector<AffineContraction> maps) {
  const std::size_t n = maps.size();
  return WeightedIFS(std::move(maps), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

double WeightedIFS::similarity_dimension() const {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < maps_.size(); ++i) {
    num += weights_[i] * std::log(weights_[i]);
    den += weights_[i] * std::log(std::abs(maps_[i].r));
  }
  return num / den;
}

std::pair<double, double> WeightedIFS::hull() const {
  double lo = maps_[0].fixed_point(), hi = lo;
  for (const auto& m : maps_) {
    lo = std::min(lo, m.fixed_point());
    hi = std::max(hi, m.fixed_point());
  }
  // The hull map is a contraction on intervals; iterate from the fixed-point
  // hull (which lies inside the attractor hull) until it stops growing.
  for (int it = 0; it < 100000; ++it) {
    double nlo = lo, nhi = hi;
    for (const auto& m : maps_) {
      const double a = m(lo), b = m(hi);
      nlo = std::min({nlo, a, b});
      nhi = std::max({nhi, a, b});
    }
    if (nlo == lo && nhi == hi) break;
    lo = nlo;
    hi = nhi;
  }
  return {lo, hi};
}

std::string word_string(const std::vector<std::uint8_t>& symbols, std::size_t alphabet) {
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (alphabet > 10 && i) out += '.';
    out += std::to_string(symbols[i]);
  }
  return out;
}

namespace {

std::vector<detail::AtomMap> atom_maps(const WeightedIFS& ifs) {
  std::vector<detail::AtomMap> out;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const auto& m = ifs.maps()[i];
    out.push_back(detail::AtomMap{m.r, {m.s, 0.0}, ifs.weights()[i], -std::log2(std::abs(m.r))});
  }
  return out;
}

void enumerate(const WeightedIFS& ifs, const std::vector<detail::AtomMap>& am, double stop,
               Word& cur, double acc, std::vector<Word>& out) {
  if (acc >= stop - detail::kStopSlack) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    Word next = cur;
    next.symbols.push_back(static_cast<std::uint8_t>(i));
    next.s = cur.r * ifs.maps()[i].s + cur.s;
    next.r = cur.r * ifs.maps()[i].r;
    next.p = cur.p * ifs.weights()[i];
    enumerate(ifs, am, stop, next, acc + am[i].logc, out);
  }
}

}  // namespace

std::uint64_t count_stopping_words(const WeightedIFS& ifs, int k, std::uint64_t cap) {
  return detail::count_words(atom_maps(ifs), static_cast<double>(k), cap);
}

std::vector<Word> stopping_words(const WeightedIFS& ifs, int k, std::uint64_t budget) {
  if (k < 0) throw Error("negative depth");
  if (count_stopping_words(ifs, k, budget + 1) > budget) throw Error("budget exceeded");
  const auto am = atom_maps(ifs);
  std::vector<Word> out;
  Word root;
  enumerate(ifs, am, static_cast<double>(k), root, 0.0, out);
  return out;
}

Conjugation hull_conjugation(const WeightedIFS& ifs) {
  const auto [lo, hi] = ifs.hull();
  Conjugation c;
  c.offset = lo;
  c.scale = hi > lo ? 1.0 / (hi - lo) : 1.0;
  return c;
}

namespace {

template <class Builder>
IfsTree build_with(const WeightedIFS& ifs, int n, const BuildOptions& opt, Builder build) {
  if (n < 0 || n > max_key_depth(1)) throw Error("depth out of range");
  if (opt.guard < 0) throw Error("guard must be nonnegative");
  const auto am = atom_maps(ifs);
  const double stop = static_cast<double>(n + opt.guard);
  const std::uint64_t words = detail::count_words(am, stop, opt.budget + 1);
  if (words > opt.budget) throw Error("budget exceeded");
  IfsTree out;
  out.conj = hull_conjugation(ifs);
  out.x0 = ifs.maps()[0].fixed_point();
  out.words = words;
  detail::AtomSpec spec;
  spec.dim = 1;
  spec.depth = n;
  spec.stop = stop;
  spec.x0 = {out.x0, 0.0};
  spec.scale = out.conj.scale;
  spec.offset = {out.conj.offset, 0.0};
  out.measure = build(am, spec);
  return out;
}

}  // namespace

IfsTree build_tree_measure(const WeightedIFS& ifs, int n, const BuildOptions& opt) {
  return build_with(ifs, n, opt, detail::build_atoms_parallel);
}

IfsTree build_tree_measure_serial(const WeightedIFS& ifs, int n, const BuildOptions& opt) {
  return build_with(ifs, n, opt, detail::build_atoms_serial);
}

TreeMeasure apply_ifs_operator(const IfsTree& tree, const WeightedIFS& ifs) {
  const TreeMeasure& mu = tree.measure;
  const int n = mu.max_depth();
  const double side = std::ldexp(1.0, -n);
  const std::int64_t ncell = std::int64_t{1} << n;
  std::map<std::int64_t, double> out;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    // g = conj o f_i o conj^-1 is y -> r y + c in unit coordinates.
    const double r = ifs.maps()[i].r;
    const double c = tree.conj.to_unit(ifs.maps()[i](tree.conj.from_unit(0.0)));
    const double p = ifs.weights()[i];
    for (const auto& cm : mu.level(n)) {
      const double a0 = c + r * (static_cast<double>(cm.key) * side);
      const double a1 = c + r * (static_cast<double>(cm.key + 1) * side);
      const double lo = std::min(a0, a1), hi = std::max(a0, a1);
      const double len = hi - lo;
      auto first = static_cast<std::int64_t>(std::floor(lo / side));
      auto last = static_cast<std::int64_t>(std::floor(hi / side));
      for (std::int64_t j = first; j <= last; ++j) {
        const double ov = std::min(hi, (j + 1) * side) - std::max(lo, j * side);
        if (ov <= 0.0) continue;
        out[std::clamp<std::int64_t>(j, 0, ncell - 1)] += p * cm.mass * ov / len;
      }
    }
  }
  std::vector<CellMass> leaves;
  for (const auto& [k, m] : out) leaves.push_back(CellMass{static_cast<std::uint64_t>(k), m});
  return TreeMeasure::from_leaves(1, n, std::move(leaves));
}

}  // namespace dyadlab
