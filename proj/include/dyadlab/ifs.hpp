#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyadlab/tree_measure.hpp"

namespace dyadlab {

/// x -> r x + s with 0 < |r| < 1.
struct AffineContraction {
  double r = 0.5;
  double s = 0.0;

  double operator()(double x) const { return r * x + s; }
  double fixed_point() const { return s / (1.0 - r); }
};

class WeightedIFS {
 public:
  WeightedIFS() = default;
  /// Validates |r| < 1, r != 0, p > 0 and sum p = 1 (1e-12).
  WeightedIFS(std::vector<AffineContraction> maps, std::vector<double> weights);
  static WeightedIFS uniform(std::vector<AffineContraction> maps);

  std::size_t size() const { return maps_.size(); }
  const std::vector<AffineContraction>& maps() const { return maps_; }
  const std::vector<double>& weights() const { return weights_; }

  /// (sum p log p) / (sum p log |r|).
  double similarity_dimension() const;
  /// Convex hull [lo, hi] of the attractor.
  std::pair<double, double> hull() const;

 private:
  std::vector<AffineContraction> maps_;
  std::vector<double> weights_;
};

struct Word {
  std::vector<std::uint8_t> symbols;
  double r = 1.0;  // r_I
  double s = 0.0;  // f_I(x) = r x + s, so f_I(0) = s
  double p = 1.0;  // p_I

  double apply(double x) const { return r * x + s; }
};

/// Symbols concatenated as decimal digits (alphabets up to 10) or
/// dot-separated otherwise.
std::string word_string(const std::vector<std::uint8_t>& symbols, std::size_t alphabet);

inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 26;

/// Lambda_k = { I : |r_I| <= 2^-k < |r_{I^-}| } in lexicographic order.
std::vector<Word> stopping_words(const WeightedIFS& ifs, int k,
                                 std::uint64_t budget = kDefaultWordBudget);
/// |Lambda_k| by memoized counting over ratio multiplicities; saturates at `cap`.
std::uint64_t count_stopping_words(const WeightedIFS& ifs, int k,
                                   std::uint64_t cap = ~std::uint64_t{0});

/// Affine map sending the attractor hull onto [0,1]: y = (x - offset) * scale.
struct Conjugation {
  double offset = 0.0;
  double scale = 1.0;

  double to_unit(double x) const { return (x - offset) * scale; }
  double from_unit(double y) const { return y / scale + offset; }
};

Conjugation hull_conjugation(const WeightedIFS& ifs);

struct BuildOptions {
  int guard = 6;
  std::uint64_t budget = kDefaultWordBudget;
};

struct IfsTree {
  TreeMeasure measure;
  Conjugation conj;
  std::uint64_t words = 0;
  double x0 = 0.0;
};

/// Depth-n tree of the self-similar measure: every I in Lambda_{n+guard}
/// deposits p_I in the cell of f_I(x0), x0 the fixed point of the first map,
/// after conjugating the attractor hull onto [0,1].
IfsTree build_tree_measure(const WeightedIFS& ifs, int n, const BuildOptions& opt = {});
IfsTree build_tree_measure_serial(const WeightedIFS& ifs, int n, const BuildOptions& opt = {});

/// One application of nu -> sum p_i (f_i nu) in unit coordinates, with each
/// cell's mass spread uniformly over its image and re-binned at the same depth.
TreeMeasure apply_ifs_operator(const IfsTree& tree, const WeightedIFS& ifs);

}  // namespace dyadlab
