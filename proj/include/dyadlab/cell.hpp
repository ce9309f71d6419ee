#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dyadlab {

/// Half-open dyadic box  prod_i [l_i / 2^k, (l_i + 1) / 2^k)  in dimension 1 or 2.
struct DyadicCell {
  int dim = 1;
  int depth = 0;
  std::array<std::int64_t, 2> coords{0, 0};

  static DyadicCell root(int dim) { return DyadicCell{dim, 0, {0, 0}}; }

  DyadicCell parent() const;
  DyadicCell ancestor(int k) const;
  /// The 2^dim children, ordered by Morton code of the child offset.
  std::vector<DyadicCell> children() const;
  bool contains(std::span<const double> x) const;
  bool contains(const DyadicCell& other) const;
  double side() const;
  double lower(int axis) const;
  std::string to_string() const;

  bool operator==(const DyadicCell&) const = default;
  auto operator<=>(const DyadicCell&) const = default;
};

DyadicCell cell_of_point(std::span<const double> x, int k);
DyadicCell cell_of_point(double x, int k);

/// Morton (bit-interleaved) key of a cell inside [0,1)^dim.  For dim 1 this is
/// the coordinate itself; for dim 2 bit i of x goes to bit 2i, of y to 2i+1, so
/// the children of key c are exactly (c << dim) + 0 .. (c << dim) + 2^dim - 1.
std::uint64_t morton_key(const DyadicCell& cell);
DyadicCell cell_from_key(int dim, int depth, std::uint64_t key);
std::uint64_t interleave2(std::uint32_t x, std::uint32_t y);
void deinterleave2(std::uint64_t key, std::uint32_t& x, std::uint32_t& y);

/// Largest depth a key-addressed tree supports in the given dimension.
constexpr int max_key_depth(int dim) { return dim == 1 ? 62 : 31; }

}  // namespace dyadlab
