#include "dyadlab/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "dyadlab/error.hpp"

namespace dyadlab::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  static const int initial = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : initial);
#else
  (void)n;
#endif
}

namespace {

inline double term(double m) { return m > 0.0 ? -m * std::log2(m) : 0.0; }

template <class Get>
double blocked_sum(std::size_t n, Get get) {
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(get(i));
    partial[b] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace

double entropy_bits(std::span<const CellMass> cells) {
  return blocked_sum(cells.size(), [&](std::size_t i) { return cells[i].mass; });
}

double entropy_bits_serial(std::span<const CellMass> cells) {
  double h = 0.0;
  for (const auto& c : cells) h += term(c.mass);
  return h;
}

double entropy_bits(std::span<const double> p) {
  return blocked_sum(p.size(), [&](std::size_t i) { return p[i]; });
}

double entropy_bits_serial(std::span<const double> p) {
  double h = 0.0;
  for (double m : p) h += term(m);
  return h;
}

Fixed to_fixed(double m) {
  if (!(m >= 0.0) || m > 4.0) throw Error("mass outside fixed-point range");
  // m < 4 so m * 2^96 < 2^98; split into high and low 48-bit-ish parts exactly.
  const double hi = std::floor(std::ldexp(m, 48));
  const double lo = std::ldexp(m, 96) - std::ldexp(hi, 48);
  return (static_cast<Fixed>(static_cast<std::uint64_t>(hi)) << 48) +
         static_cast<Fixed>(static_cast<std::uint64_t>(std::floor(lo)));
}

double from_fixed(Fixed f) {
  const auto hi = static_cast<std::uint64_t>(f >> 64);
  const auto lo = static_cast<std::uint64_t>(f);
  return std::ldexp(static_cast<double>(hi), -32) + std::ldexp(static_cast<double>(lo), -96);
}

}  // namespace dyadlab::kernels
