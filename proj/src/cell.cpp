#include "dyadlab/cell.hpp"

#include <cmath>
#include <sstream>

#include "dyadlab/error.hpp"

namespace dyadlab {

DyadicCell DyadicCell::parent() const {
  if (depth == 0) throw Error("root cell has no parent");
  return ancestor(depth - 1);
}

DyadicCell DyadicCell::ancestor(int k) const {
  if (k < 0 || k > depth) throw Error("ancestor depth out of range");
  DyadicCell out{dim, k, {0, 0}};
  const int shift = depth - k;
  // Arithmetic shift is floor division, so negative coordinates work too.
  for (int i = 0; i < dim; ++i) out.coords[i] = coords[i] >> shift;
  return out;
}

std::vector<DyadicCell> DyadicCell::children() const {
  std::vector<DyadicCell> out;
  const int n = 1 << dim;
  out.reserve(n);
  for (int c = 0; c < n; ++c) {
    DyadicCell ch{dim, depth + 1, {0, 0}};
    for (int i = 0; i < dim; ++i) ch.coords[i] = 2 * coords[i] + ((c >> i) & 1);
    out.push_back(ch);
  }
  return out;
}

bool DyadicCell::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) < dim) return false;
  for (int i = 0; i < dim; ++i) {
    const double scaled = std::ldexp(x[i], depth);
    if (static_cast<std::int64_t>(std::floor(scaled)) != coords[i]) return false;
  }
  return true;
}

bool DyadicCell::contains(const DyadicCell& other) const {
  return other.dim == dim && other.depth >= depth && other.ancestor(depth) == *this;
}

double DyadicCell::side() const { return std::ldexp(1.0, -depth); }

double DyadicCell::lower(int axis) const {
  return std::ldexp(static_cast<double>(coords[axis]), -depth);
}

std::string DyadicCell::to_string() const {
  std::ostringstream os;
  for (int i = 0; i < dim; ++i) {
    if (i) os << ';';
    os << coords[i];
  }
  return os.str();
}

DyadicCell cell_of_point(std::span<const double> x, int k) {
  if (k < 0) throw Error("negative depth");
  DyadicCell c{static_cast<int>(x.size()), k, {0, 0}};
  if (c.dim < 1 || c.dim > 2) throw Error("dimension must be 1 or 2");
  for (int i = 0; i < c.dim; ++i) {
    c.coords[i] = static_cast<std::int64_t>(std::floor(std::ldexp(x[i], k)));
  }
  return c;
}

DyadicCell cell_of_point(double x, int k) {
  const double p[1] = {x};
  return cell_of_point(std::span<const double>(p, 1), k);
}

std::uint64_t interleave2(std::uint32_t x, std::uint32_t y) {
  auto spread = [](std::uint64_t v) {
    v &= 0xffffffffULL;
    v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
    v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v << 2)) & 0x3333333333333333ULL;
    v = (v | (v << 1)) & 0x5555555555555555ULL;
    return v;
  };
  return spread(x) | (spread(y) << 1);
}

void deinterleave2(std::uint64_t key, std::uint32_t& x, std::uint32_t& y) {
  auto compact = [](std::uint64_t v) {
    v &= 0x5555555555555555ULL;
    v = (v | (v >> 1)) & 0x3333333333333333ULL;
    v = (v | (v >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v >> 4)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v >> 8)) & 0x0000ffff0000ffffULL;
    v = (v | (v >> 16)) & 0x00000000ffffffffULL;
    return static_cast<std::uint32_t>(v);
  };
  x = compact(key);
  y = compact(key >> 1);
}

std::uint64_t morton_key(const DyadicCell& cell) {
  const std::int64_t limit = std::int64_t{1} << cell.depth;
  for (int i = 0; i < cell.dim; ++i) {
    if (cell.coords[i] < 0 || cell.coords[i] >= limit) throw Error("cell outside unit cube");
  }
  if (cell.dim == 1) return static_cast<std::uint64_t>(cell.coords[0]);
  return interleave2(static_cast<std::uint32_t>(cell.coords[0]),
                     static_cast<std::uint32_t>(cell.coords[1]));
}

DyadicCell cell_from_key(int dim, int depth, std::uint64_t key) {
  DyadicCell c{dim, depth, {0, 0}};
  if (dim == 1) {
    c.coords[0] = static_cast<std::int64_t>(key);
  } else {
    std::uint32_t x = 0, y = 0;
    deinterleave2(key, x, y);
    c.coords[0] = x;
    c.coords[1] = y;
  }
  return c;
}

}  // namespace dyadlab
