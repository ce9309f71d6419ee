#pragma once

// Internal: stopping-word enumeration and atom placement shared by the 1-D and
// planar tree builders.

#include <array>
#include <cstdint>
#include <vector>

#include "dyadlab/tree_measure.hpp"

namespace dyadlab::detail {

struct AtomMap {
  double r = 0.0;                // signed ratio (planar maps use r > 0)
  std::array<double, 2> s{0, 0};  // translation
  double p = 0.0;                // weight
  double logc = 0.0;             // -log2 |r|
};

struct AtomSpec {
  int dim = 1;
  int depth = 0;                     // output tree depth n
  double stop = 0.0;                 // K: stop once sum of logc >= K - kStopSlack
  std::array<double, 2> x0{0, 0};    // reference point
  double scale = 1.0;                // unit coordinate = (x - offset) * scale
  std::array<double, 2> offset{0, 0};
};

inline constexpr double kStopSlack = 1e-9;

/// |Lambda_K| without enumeration, saturating at `cap`.
std::uint64_t count_words(const std::vector<AtomMap>& maps, double stop, std::uint64_t cap);

TreeMeasure build_atoms_parallel(const std::vector<AtomMap>& maps, const AtomSpec& spec);
TreeMeasure build_atoms_serial(const std::vector<AtomMap>& maps, const AtomSpec& spec);

}  // namespace dyadlab::detail
