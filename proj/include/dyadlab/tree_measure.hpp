#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dyadlab/cell.hpp"

namespace dyadlab {

struct CellMass {
  std::uint64_t key = 0;
  double mass = 0.0;
};

/// Finite-depth measure on [0,1)^dim stored as a pyramid of dyadic levels.
///
/// Level k holds the positive-mass cells of depth k sorted by Morton key, so
/// the descendants of any cell form one contiguous run at every finer level.
/// Instances are immutable values; every constructor establishes child-sum
/// consistency (parents are the sums of their children).
class TreeMeasure {
 public:
  TreeMeasure() = default;

  /// Sums duplicate keys, drops zero masses and aggregates the pyramid.
  static TreeMeasure from_leaves(int dim, int depth, std::vector<CellMass> leaves);
  /// Adopts already aggregated levels verbatim (deserialization path).
  static TreeMeasure from_levels(int dim, std::vector<std::vector<CellMass>> levels);

  static TreeMeasure uniform(int dim, int depth);
  static TreeMeasure dirac(std::span<const double> point, int depth);
  /// Self-similar product measure in base 2^bits: each block of `bits` binary
  /// digits (per axis) is drawn independently with the given weights, indexed
  /// by the Morton code of the digit block.
  static TreeMeasure digit_measure(int dim, int bits, std::span<const double> weights,
                                   int depth);
  /// Base-2 Bernoulli(p) measure in dimension 1: left child gets p.
  static TreeMeasure bernoulli(double p, int depth);
  /// Finite convex combination; all inputs must share dim and depth.
  static TreeMeasure mixture(std::span<const TreeMeasure> parts, std::span<const double> q);

  int dim() const { return dim_; }
  int max_depth() const { return depth_; }
  double total_mass() const;
  std::span<const CellMass> level(int k) const;
  std::size_t support_size(int k) const { return level(k).size(); }

  double mass(const DyadicCell& cell) const;
  double mass(int depth, std::uint64_t key) const;
  /// Index range [first, last) in level `finer` of the descendants of `key` at level `coarse`.
  std::pair<std::size_t, std::size_t> descendant_range(int coarse, std::uint64_t key,
                                                       int finer) const;

  /// mu^D: restrict to D, normalize and rescale D onto [0,1)^dim.
  TreeMeasure component(const DyadicCell& cell) const;
  TreeMeasure truncated(int depth) const;
  TreeMeasure normalized() const;

  /// Max relative child-sum defect over all internal cells.
  double consistency_defect() const;
  bool is_consistent(double rel_tol = 1e-12) const { return consistency_defect() <= rel_tol; }

  /// Point sampled from this measure: descends the pyramid by mass ratios and
  /// then draws uniformly inside the leaf.  `u` yields uniforms in [0,1).
  template <class Uniform01>
  std::vector<double> sample(Uniform01&& u) const;

 private:
  int dim_ = 1;
  int depth_ = 0;
  std::vector<std::vector<CellMass>> levels_;
};

/// Sparse histogram over dyadic cells of a fixed depth with unrestricted integer
/// coordinates.  Used wherever a measure leaves the unit cube (translations).
struct CellHistogram {
  int dim = 1;
  int depth = 0;
  std::vector<std::pair<std::array<std::int64_t, 2>, double>> cells;  // sorted by coords

  static CellHistogram from_tree(const TreeMeasure& mu, int depth);
  /// Entropy at a coarser depth k <= depth (floor-coarsening of coordinates).
  double entropy(int k) const;
  double total_mass() const;
  void canonicalize();
};

/// Translate by s (one entry per axis), treating each cell's mass as uniform
/// inside the cell, and re-bin onto the same depth grid.
CellHistogram translate_rebin(const CellHistogram& h, std::span<const double> shift);

// ---------------------------------------------------------------------------

template <class Uniform01>
std::vector<double> TreeMeasure::sample(Uniform01&& u) const {
  std::uint64_t key = 0;
  for (int k = 1; k <= depth_; ++k) {
    const auto [first, last] = descendant_range(k - 1, key, k);
    const auto lv = level(k);
    double total = 0.0;
    for (std::size_t i = first; i < last; ++i) total += lv[i].mass;
    double target = u() * total;
    std::size_t pick = last - 1;
    for (std::size_t i = first; i < last; ++i) {
      if (target < lv[i].mass) {
        pick = i;
        break;
      }
      target -= lv[i].mass;
    }
    key = lv[pick].key;
  }
  const DyadicCell leaf = cell_from_key(dim_, depth_, key);
  std::vector<double> x(dim_);
  for (int i = 0; i < dim_; ++i) x[i] = leaf.lower(i) + u() * leaf.side();
  return x;
}

}  // namespace dyadlab
