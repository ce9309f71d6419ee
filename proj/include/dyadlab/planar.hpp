#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dyadlab/ifs.hpp"
#include "dyadlab/quadratic.hpp"
#include "dyadlab/tree_measure.hpp"

namespace dyadlab {

/// x -> r x + t with 0 < r < 1 (homothety, no rotation).
struct PlanarMap {
  double r = 0.5;
  std::array<double, 2> t{0.0, 0.0};
};

class PlanarIFS {
 public:
  PlanarIFS() = default;
  PlanarIFS(std::vector<PlanarMap> maps, std::vector<double> weights);

  std::size_t size() const { return maps_.size(); }
  const std::vector<PlanarMap>& maps() const { return maps_; }
  const std::vector<double>& weights() const { return weights_; }
  double similarity_dimension() const;
  /// Bounding box [lo, hi] per axis of the attractor.
  std::array<std::pair<double, double>, 2> hull() const;

 private:
  std::vector<PlanarMap> maps_;
  std::vector<double> weights_;
};

/// Ratio 1/4, translations (a/4, b/4) for (a,b) in {(0,0),(3,0),(0,3),(3,3)},
/// uniform weights.
PlanarIFS four_corner_ifs();

/// A line direction theta in [0, pi).  May carry an exact form: an integer
/// or rational direction vector, or a rational multiple of pi.
class Direction {
 public:
  static Direction from_angle(double theta);
  /// theta = q pi; multiples of pi/4 become exact vectors.
  static Direction from_pi_fraction(const Rational& q);
  /// Direction of the vector (vx, vy), not both zero.
  static Direction from_vector(const Rational& vx, const Rational& vy);

  double theta() const { return theta_; }
  bool exact() const { return vec_.has_value(); }
  const std::optional<std::array<Rational, 2>>& vector() const { return vec_; }
  const std::optional<Rational>& pi_fraction() const { return frac_; }

  /// (cos theta, sin theta).  Rational multiples of pi are reduced to the
  /// first octant first, so theta and pi/2 - theta give exactly swapped pairs.
  std::array<double, 2> unit() const;
  double project(double x, double y) const;
  std::string to_string() const;

 private:
  double theta_ = 0.0;
  std::optional<Rational> frac_;
  std::optional<std::array<Rational, 2>> vec_;
};

/// Direction theta with pi_theta(t1) = pi_theta(t2).  Throws "degenerate pair".
Direction coincidence_direction(std::array<double, 2> t1, std::array<double, 2> t2);

struct ProjectedIFS {
  WeightedIFS ifs;
  std::size_t merged_maps = 0;  // maps removed by merging
  std::size_t near_merges = 0;  // merges decided by tolerance, not exactly
  bool exact_merge = false;
};

/// x -> r_i x + pi_theta(t_i); identical maps merged with summed weights,
/// sorted by (translation, ratio).
ProjectedIFS project_ifs(const PlanarIFS& ifs, const Direction& dir, double tol = 1e-12);

struct PlanarTree {
  TreeMeasure measure;
  std::array<double, 2> offset{0, 0};
  double scale = 1.0;
  std::uint64_t words = 0;
};

/// 2-D analogue of build_tree_measure (atoms f_I(x0), x0 the first map's
/// fixed point, bounding box scaled uniformly into [0,1]^2).
PlanarTree build_planar_tree(const PlanarIFS& ifs, int n, const BuildOptions& opt = {});

/// Greedy cover of the level-`level` cylinder hulls (hull-rescaled frame) by
/// closed intervals of length delta; for disjoint pieces this is N_delta.
std::size_t interval_cover_count(const WeightedIFS& ifs, int level, double delta);

struct DirectionRow {
  double theta = 0.0;
  int depth = 0;
  double h_over_n = 0.0;
  std::size_t cover_count = 0;     // dyadic cells at depth n
  std::size_t interval_cover = 0;  // greedy N_delta, delta = 2^-n, over Lambda_n images
  std::size_t merged_map_count = 0;  // maps left after merging
};

std::vector<DirectionRow> direction_scan(const PlanarIFS& ifs, const std::vector<Direction>& dirs, int n,
                                         const BuildOptions& opt = {});

struct AssouadEstimate {
  int k = 0;
  int m = 0;
  std::vector<std::pair<DyadicCell, double>> ratios;  // per depth-k cell: log2 N / m
  double estimate = 0.0;
};

/// max over depth-k cells Q meeting the support of log2 N(Q, 2^-(k+m)) / m.
AssouadEstimate assouad_estimate(const TreeMeasure& support, int k, int m);

/// Conditional measure on the strip pi_theta^-1 [x, x + 2^-w): finest cells
/// whose centre projects into the strip, pushed to the orthogonal axis
/// (rescaled onto [0,1)) and normalized.  Throws "empty component".
TreeMeasure strip_conditional(const TreeMeasure& mu, const Direction& dir, double x, int w);

/// Pushforward of a 2-D tree under pi_theta, cell centres binned at the same
/// depth after rescaling pi_theta([0,1]^2) onto [0,1].
TreeMeasure project_tree(const TreeMeasure& mu, const Direction& dir);

}  // namespace dyadlab
