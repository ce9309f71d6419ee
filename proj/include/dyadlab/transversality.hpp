#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyadlab/parametric.hpp"

namespace dyadlab {

/// lo, lo+step, ... up to hi (inclusive within 1e-9 step).  Throws when the
/// step exceeds the interval length.
std::vector<double> grid_from_step(double lo, double hi, double step);
/// `points` equally spaced values including both ends.
std::vector<double> uniform_grid(double lo, double hi, int points);

struct TransversalityOptions {
  double beta = 1.0;
  double c_beta = 0.02;
  int depth = 8;
  /// Pairs per shared-prefix stratum above which the stratum is sampled.
  std::uint64_t stratum_budget = std::uint64_t{1} << 18;
  std::uint64_t seed = 1;
  std::size_t max_recorded = 100;
};

struct Violation {
  std::string x;
  std::string y;
  double t = 0.0;
  double delta = 0.0;
  double d1 = 0.0;
};

struct StratumSummary {
  int shared_prefix = 0;
  double distance = 0.0;
  std::uint64_t pairs_total = 0;
  std::uint64_t pairs_audited = 0;
  bool exhaustive = true;
};

struct TransversalityReport {
  double beta = 0.0;
  double c_beta = 0.0;
  int depth = 0;
  std::vector<double> grid;
  std::uint64_t pairs_audited = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t violation_count = 0;
  std::vector<Violation> violations;  // first max_recorded, ordered by (t, x, y)
  std::vector<StratumSummary> strata;
};

/// Audits the implication |Delta| <= C d^beta  =>  |Delta'| >= C d^beta over
/// pairs of codings I 0^inf, J 0^inf with I != J of length `depth`, stratified
/// by the shared prefix length m (d = 2^-m).  An empty violation list means
/// only that nothing was found at this resolution.
TransversalityReport transversality_audit(const ParametricFamily& fam, double lo, double hi,
                                          const std::vector<double>& grid,
                                          const TransversalityOptions& opt);

}  // namespace dyadlab
