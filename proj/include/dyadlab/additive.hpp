#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dyadlab/grid_set.hpp"
#include "dyadlab/tree_measure.hpp"

namespace dyadlab {

struct GrowthReport {
  int n = 0;
  std::uint64_t size_a = 0;
  std::uint64_t size_b = 0;
  std::vector<std::uint64_t> b_a_sizes;  // aligned with A in increasing order
  std::uint64_t sum_b_a = 0;
  std::uint64_t max_b_a = 0;
  std::uint64_t union_size = 0;
  std::optional<double> exponent;  // log|U| / log|B|, absent when |B| <= 1
};

/// U = union over a in A of (a + B_a) on the [0,2] grid.  `b_map[i]` belongs
/// to the i-th element of A.  B is only used for |B| and the exponent.
GridSet translate_union_set(const GridSet& a, const std::vector<GridSet>& b_map);
GridSet translate_union_set_serial(const GridSet& a, const std::vector<GridSet>& b_map);
GrowthReport translate_union(const GridSet& a, const GridSet& b, const std::vector<GridSet>& b_map);

/// #{(a1, a2, b1, b2) : a1 + b1 = a2 + b2} = sum_s r(s)^2.
std::uint64_t additive_energy(const GridSet& a, const GridSet& b);
std::uint64_t additive_energy_serial(const GridSet& a, const GridSet& b);

struct RegularizationResult {
  int dim = 1;
  int T = 1;
  int l = 1;
  std::vector<std::uint64_t> cells;  // Morton keys of the selected depth-lT cells
  std::vector<double> sigma;         // sigma_1..sigma_l
  std::vector<double> ratio;         // 2^{-sigma_i T}, the value the ratio clause is checked against
  double retained_mass = 0.0;        // mu(X) / mu(total)
  double mass_bound = 0.0;           // (2Td + 2)^{-l}
  TreeMeasure restricted;            // mu restricted to X (not normalized)
};

/// Bottom-up selection: at each level the common ratio window [rho/2, rho]
/// and, per parent, a run of children (sorted by mass) maximizing retained
/// mass are chosen by a sweep over candidate rho.
RegularizationResult regularize(const TreeMeasure& mu, int T, int l);

struct RegularizationCheck {
  bool mass_ok = false;
  bool ratio_ok = false;
  std::string failure;  // first violated clause, empty when both hold
};

/// Re-derives mu restricted to X from the selected cells and checks both
/// clauses without trusting the construction.
RegularizationCheck check_regularization(const TreeMeasure& mu, const RegularizationResult& r);

struct PorosityResult {
  TreeMeasure nu;
  int blocks = 0;          // n rho: guaranteed disjoint decay blocks on every point of D
  double rho = 0.0;
  double bound = 0.0;      // tau^{n rho}
  double mu_d = 0.0;       // sum of mu(Q) over D_n cells meeting D (direct)
  double min_gain = 0.0;   // min over D of nu(D_n(x)) / mu(D_n(x))
  bool pointwise_ok = false;
  std::uint64_t points = 0;
};

/// Renormalized measure along D-meeting cells and the bound mu(D) <= tau^{n rho}.
/// Throws naming the first point and hypothesis that fails.
PorosityResult porosity_witness(const TreeMeasure& mu, const GridSet& d, int n, int l, double tau, double gamma);

/// Unit-grid points whose base-4 digits all lie in {0, 1}.
GridSet base4_low_digit_set(int n);

struct ExperimentParams {
  double gamma = 0.25;
  int l = 2;
  double delta = 0.1;
};

struct HypothesisFlags {
  bool mass = false;       // eta(A) >= 1/2
  bool spreading = false;  // every a: #{k : eta(D_k) >= 2 eta(D_{k+l})} >= (1 - gamma/2) n
  bool b_small = false;    // |B| <= 2^{n(1-gamma)}
  bool b_a_large = false;  // |B_a| >= |B|^{1-delta}
  bool b_a_subset = false; // B_a subset of B
  bool all() const { return mass && spreading && b_small && b_a_large && b_a_subset; }
};

struct ExperimentReport {
  int n = 0;
  ExperimentParams params;
  HypothesisFlags hypotheses;
  double eta_a = 0.0;
  std::uint64_t min_spreading_count = 0;
  double spreading_needed = 0.0;
  GrowthReport growth;
  double target = 0.0;  // |B|^{1+delta}
  bool growth_verdict = false;
};

/// Grid measure on [0,1) with the given masses on j 2^-n, j < 2^n, stored at
/// depth n + l so that D_{k+l} is resolved for every k <= n.
TreeMeasure grid_measure(int n, int l, const std::vector<std::pair<std::uint64_t, double>>& masses);

ExperimentReport entropy_increase_experiment(const TreeMeasure& eta, const GridSet& a, const GridSet& b,
                                             const std::vector<GridSet>& b_map, const ExperimentParams& p);

ExperimentReport positive_preset(int n, const ExperimentParams& p);
ExperimentReport failed_preset(int n, const ExperimentParams& p);

struct AdversarialInstance {
  std::string a_kind;
  std::uint64_t step = 0;
  std::uint64_t length = 0;
  std::uint64_t window = 0;
  HypothesisFlags hypotheses;
  std::uint64_t union_size = 0;
  double exponent = 0.0;
  bool growth = false;
};

struct AdversarialReport {
  int n = 0;
  ExperimentParams params;
  std::vector<AdversarialInstance> instances;
  std::optional<double> min_exponent;  // over hypothesis-satisfying instances
  bool counterexample = false;         // hypotheses hold but no growth
};

/// A in {full, every 2nd, every 4th point} with eta uniform on A, B an
/// arithmetic progression, B_a a window of ceil(|B|^{1-delta}) consecutive
/// terms chosen greedily (a increasing) to add the fewest new sums.
AdversarialReport adversarial_search(int n, const ExperimentParams& p);

struct BsgBridge {
  std::uint64_t g_size = 0;        // sum |B_a|
  std::uint64_t sumset_size = 0;   // |{a + b : b in B_a}|
  std::uint64_t energy = 0;        // E(A, B)
  double log_l = 0.0;              // log2 L
  double delta = 0.0;              // smallest delta for which the BSG hypotheses hold
  double cs_bound = 0.0;           // |G|^2 / |S|
  double bound = 0.0;              // L^{-3 delta} |A| |B|^2
  double bound_2delta = 0.0;       // L^{-2 delta} |A| |B|^2
  bool holds = false;              // energy >= cs_bound >= bound
  bool holds_2delta = false;
};

/// Energy side of the asymmetric BSG hypotheses, checked on computed values.
/// L defaults to 2^n.
BsgBridge bsg_bridge(const GridSet& a, const GridSet& b, const std::vector<GridSet>& b_map,
                     std::optional<double> log2_l = std::nullopt);

}  // namespace dyadlab
