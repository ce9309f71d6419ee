#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyadlab/tree_measure.hpp"

namespace dyadlab {

/// Where scenery windows come from.  A fixed tree is consumed one level per
/// magnification; a digit measure (self-similar in base 2^bits, no overlaps)
/// is re-extended exactly, so its orbits never run out of depth.
class MeasureSource {
 public:
  static std::shared_ptr<const MeasureSource> fixed(TreeMeasure mu, std::string name = "tree");
  /// Requires dim * bits <= 8; `window` is the depth of every served window.
  static std::shared_ptr<const MeasureSource> digit(int dim, int bits, std::vector<double> weights,
                                                    int window, std::string name = "digit");
  /// Base-2 Bernoulli(p) in dimension 1.
  static std::shared_ptr<const MeasureSource> bernoulli(double p, int window);
  static std::shared_ptr<const MeasureSource> lebesgue(int dim, int window);

  int dim() const { return dim_; }
  bool replenishable() const { return bits_ > 0; }
  int bits() const { return bits_; }
  const std::string& name() const { return name_; }
  const TreeMeasure& initial() const;
  /// Component at the partial digit block (depth < bits, key).
  const TreeMeasure& window(int phase_depth, std::uint64_t phase_key) const;

 private:
  int dim_ = 1;
  int bits_ = 0;
  std::string name_;
  TreeMeasure fixed_;
  std::vector<std::vector<TreeMeasure>> windows_;  // [phase depth][phase key]
};

struct SceneryState {
  TreeMeasure measure;
  std::vector<double> point;
  int remaining_depth = 0;
  std::shared_ptr<const MeasureSource> source;  // set only when replenishable
  int phase_depth = 0;
  std::uint64_t phase_key = 0;
};

/// Throws unless `point` lies in a positive-mass leaf of the source's window.
SceneryState make_state(const std::shared_ptr<const MeasureSource>& src, std::vector<double> point);

/// M(mu, x) = (mu^{D_1(x)}, 2x - digit).  Throws "exhausted budget" or
/// "zero-mass cell".
SceneryState magnify(const SceneryState& state);

struct CesaroStats {
  std::size_t steps = 0;
  int l = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint32_t> digits;  // depth-1 cell entered at each step (Morton index)
  std::vector<double> values;         // H(component_k, D_l) / l for k = 1..N
  std::vector<double> running_mean;
  double mean() const { return running_mean.empty() ? 0.0 : running_mean.back(); }
};

/// Orbit of N magnifications.  Without x the point is drawn from the measure
/// digit by digit (seeded), conditioned on the current component, so it can
/// follow a replenishable source for any number of steps.
CesaroStats scenery_orbit(const std::shared_ptr<const MeasureSource>& src, std::optional<std::vector<double>> x,
                          std::size_t steps, int l, std::uint64_t seed = 1);

/// Independent sampled orbits (seeds seed, seed+1, ...), run concurrently.
std::vector<CesaroStats> scenery_orbits(const std::shared_ptr<const MeasureSource>& src, std::size_t count,
                                        std::size_t steps, int l, std::uint64_t seed = 1);
/// Step-weighted mean of the per-orbit means; independent of orbit order.
double pooled_mean(const std::vector<CesaroStats>& runs);

struct UniformEntropyResult {
  double fraction = 0.0;  // mu-mass of points whose good-scale share is >= 1 - eps
  bool exhaustive = true;
  std::size_t points = 0;  // cells (exhaustive) or samples
};

/// mu(x : #{1 <= k <= n : |H(mu^{D_k(x)}, D_l) - l alpha| <= l eps} >= n(1-eps)).
/// samples == 0 evaluates every depth-n cell; otherwise Monte-Carlo.
UniformEntropyResult uniform_entropy_statistic(const TreeMeasure& mu, int n, int l, double eps, double alpha,
                                               std::size_t samples = 0, std::uint64_t seed = 1);

/// {0} and frac(j (sqrt5 - 1)/2), j = 1..16.
std::vector<double> default_translations();

struct SpreadingPoint {
  std::int64_t coord = 0;  // depth n+l cell of the translated measure
  double mass = 0.0;
  double bad_fraction = 0.0;
};

struct SpreadingReport {
  int n = 0;
  int l = 0;
  double eps = 0.0;
  double translation = 0.0;   // witness, or the first candidate when none passes
  double good_mass = 0.0;     // mass of points with bad fraction < eps
  std::vector<SpreadingPoint> points;
  std::vector<double> candidate_good_mass;  // per candidate
  bool spreading = false;
};

/// Bad scale k at x: eta(D_k(x)) <= 2 eta(D_{k+l}(x)).
SpreadingReport spreading_check(const TreeMeasure& eta, int n, int l, double eps,
                                const std::vector<double>& translations = default_translations());

}  // namespace dyadlab
