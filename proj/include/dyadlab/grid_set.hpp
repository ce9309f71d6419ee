#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dyadlab {

/// Subset of { j 2^-n : 0 <= j <= max_index } as a dense bitset.
///
/// The unit grid [0,1] has max_index 2^n; sums of two unit-grid sets live on
/// [0,2], max_index 2^(n+1).
class GridSet {
 public:
  GridSet() = default;
  GridSet(int n, std::uint64_t max_index);

  static GridSet unit(int n);
  static GridSet sums(int n);
  static GridSet from_indices(int n, std::uint64_t max_index, std::span<const std::uint64_t> idx);
  /// { start, start + step, ..., start + (count-1) step } on the unit grid.
  static GridSet progression(int n, std::uint64_t start, std::uint64_t step, std::uint64_t count);

  int resolution() const { return n_; }
  std::uint64_t max_index() const { return max_index_; }
  std::uint64_t size() const;
  bool empty() const { return size() == 0; }
  bool contains(std::uint64_t j) const;
  void insert(std::uint64_t j);
  void erase(std::uint64_t j);
  std::vector<std::uint64_t> indices() const;
  const std::vector<std::uint64_t>& words() const { return words_; }

  /// this |= src shifted up by `shift` indices.  Throws when a shifted element
  /// would exceed max_index.
  void or_shifted(const GridSet& src, std::uint64_t shift);
  GridSet& operator|=(const GridSet& other);
  GridSet& operator&=(const GridSet& other);
  bool operator==(const GridSet& other) const;

  /// Elements as reduced fractions, e.g. "{0,1/4,1/2}".
  std::string to_string() const;

 private:
  int n_ = 0;
  std::uint64_t max_index_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace dyadlab
