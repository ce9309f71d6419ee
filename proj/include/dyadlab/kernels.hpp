#pragma once

// Shared building blocks for the OpenMP kernels.  Every parallel kernel in the
// library produces results that do not depend on the thread count: floating
// sums are reduced over fixed-size blocks in index order, and mass
// accumulation uses 128-bit fixed point, which is associative.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dyadlab/tree_measure.hpp"

namespace dyadlab::kernels {

inline constexpr std::size_t kBlock = 4096;

/// Number of OpenMP threads the next parallel region would use (1 without OpenMP).
int max_threads();
/// Caps the worker count; n <= 0 restores the runtime default.
void set_threads(int n);

/// -sum m log2 m over the entries, computed in fixed blocks.  Masses are used
/// as given (callers normalize).
double entropy_bits(std::span<const CellMass> cells);
double entropy_bits_serial(std::span<const CellMass> cells);

/// Same for a plain array of probabilities.
double entropy_bits(std::span<const double> p);
double entropy_bits_serial(std::span<const double> p);

/// Fixed-point mass with 96 fractional bits.  Sums of up to 2^31 unit masses
/// stay exact and associative.
using Fixed = unsigned __int128;
Fixed to_fixed(double m);
double from_fixed(Fixed f);

}  // namespace dyadlab::kernels
