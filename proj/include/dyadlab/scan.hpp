#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadlab/ifs.hpp"
#include "dyadlab/parametric.hpp"

namespace dyadlab {

struct EntropyProfile {
  int depth = 0;
  int guard = 0;
  std::vector<double> t;
  std::vector<double> entropy_bits;
  std::vector<double> normalized;
  std::vector<double> sd;
};

/// H(mu_t, D_n)/n along the grid.  Weights default to the family's.
EntropyProfile entropy_profile(const ParametricFamily& fam, const std::vector<double>& grid, int n,
                               const BuildOptions& opt = {},
                               const std::vector<double>* weights = nullptr);

struct BranchCell {
  std::int64_t coord = 0;               // cell [coord 2^-n, (coord+1) 2^-n) on R
  std::vector<std::uint32_t> words;     // indices into BranchDecomposition::words
  double a = 0.0;                       // a_Q = sum of p_I over A_Q
};

struct BranchDecomposition {
  int depth = 0;
  double t0 = 0.0;
  double x0 = 0.0;
  std::size_t alphabet = 0;
  std::vector<Word> words;  // Lambda_n at t0
  std::vector<BranchCell> cells;  // nonempty A_Q, ordered by coord
};

/// A_Q = { I in Lambda_n : f_{I,t0}(x0) in Q } for Q in D_n(R).
BranchDecomposition branch_decomposition(const ParametricFamily& fam, double t0, int n, double x0 = 0.0,
                                         std::uint64_t budget = kDefaultWordBudget);

/// sum_I p_I log(1/p_I) over Lambda_n.
double word_entropy(const BranchDecomposition& dec);
/// sum_Q a_Q log(1/a_Q).
double cell_entropy(const BranchDecomposition& dec);
/// (1/n) sum_Q a_Q sum_{I in A_Q} (p_I/a_Q) log(a_Q/p_I).
double branch_entropy_excess(const BranchDecomposition& dec);

/// Entropy at D_scale of sum_{I in A_Q} (p_I/a_Q) delta_{f_{I,t0}(0)}.
double atom_entropy(const BranchDecomposition& dec, std::size_t cell, int scale_depth);
/// Same at parameter t, evaluated in 50-digit arithmetic so that scales far
/// below double resolution are meaningful.
double atom_entropy(const ParametricFamily& fam, const BranchDecomposition& dec, std::size_t cell,
                    int scale_depth, const BigFloat& t);

/// Cell maximizing (entropy of p_I/a_Q over A_Q) - atom_entropy at t and the
/// given scale: the most collapsed cell.  Pass t in high precision; the double
/// t0 stored in the decomposition is generally not the exact parameter.
std::size_t most_collapsed_cell(const ParametricFamily& fam, const BranchDecomposition& dec, int scale_depth,
                                const BigFloat& t);

struct OverlapWitness {
  std::string first;
  std::string second;
  int length = 0;
  double root = 0.0;  // refined parameter where f_I(0) = f_J(0)
};

struct DipFlag {
  std::size_t index = 0;
  double t = 0.0;
  double deficit = 0.0;
  std::optional<OverlapWitness> witness;
};

struct DipReport {
  double threshold = 0.0;
  std::vector<DipFlag> flags;  // sorted by decreasing deficit
};

/// Flags grid points with min(1, sd) - H/n > threshold.  With a polynomial
/// family, each flag is matched to the shortest word pair (length <=
/// witness_depth, equal ratio polynomials) whose translation difference has
/// a root within one grid step; the root is refined by bisection.
DipReport dip_detector(const EntropyProfile& profile, double threshold,
                       const ParametricFamily* fam = nullptr, int witness_depth = 6);

}  // namespace dyadlab
