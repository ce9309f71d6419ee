#pragma once

#include <string>
#include <vector>

#include "dyadlab/parametric.hpp"
#include "dyadlab/quadratic.hpp"

namespace dyadlab {

struct ExactMap {
  QuadraticNumber r;
  QuadraticNumber s;
};

/// IFS with coefficients in Q or Q(sqrt d).
struct ExactIFS {
  std::vector<ExactMap> maps;

  /// Evaluates an exact polynomial family at an algebraic parameter.
  static ExactIFS from_family(const ParametricFamily& fam, const QuadraticNumber& t);
};

/// (sqrt 5 - 1) / 2, the positive root of t^2 + t - 1.
QuadraticNumber golden_ratio_conjugate();

struct OverlapPair {
  std::string first;
  std::string second;
  int length = 0;
};

/// Every pair I != J of equal length <= n with r_I = r_J and f_I(0) = f_J(0),
/// decided exactly.  Pairs are listed by length, then by word order.
std::vector<OverlapPair> exact_overlap_search(const ExactIFS& ifs, int n);
std::vector<OverlapPair> exact_overlap_search(const ParametricFamily& fam, const QuadraticNumber& t, int n);

}  // namespace dyadlab
