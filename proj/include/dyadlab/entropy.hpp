#pragma once

#include <span>

#include "dyadlab/cell.hpp"
#include "dyadlab/tree_measure.hpp"

namespace dyadlab {

struct EntropyReport {
  int depth = 0;
  double entropy_bits = 0.0;
  double normalized = 0.0;  // H / depth, 0 at depth 0
};

/// H(mu, D_k) in bits.  Throws "insufficient resolution" when k > max_depth.
EntropyReport shannon_entropy(const TreeMeasure& mu, int k);
double shannon_entropy_serial(const TreeMeasure& mu, int k);

struct EntropySplit {
  double coarse = 0.0;       // H(mu, D_k1)
  double conditional = 0.0;  // H(mu, D_k2 | D_k1)
};

/// Chain-rule split of H(mu, D_k2) over the refinement D_k1 -> D_k2.  The
/// conditional term is evaluated directly from its defining sum, not by
/// subtraction.
EntropySplit refine_entropy_decomposition(const TreeMeasure& mu, int k1, int k2);

/// sum_{k<n} sum_{Q in D_k} mu(Q) H(mu^Q, D_T) / T.
double multiscale_entropy(const TreeMeasure& mu, int n, int T);

/// H(mu^Q, D_T) for the component at (depth, key) without materializing it.
double component_entropy(const TreeMeasure& mu, int depth, std::uint64_t key, int T);

/// Number of distinct depth-m ancestors of the given cells.
std::size_t covering_number(std::span<const DyadicCell> cells, int m);
/// Support size of mu at depth m.
std::size_t covering_number(const TreeMeasure& mu, int m);

}  // namespace dyadlab
