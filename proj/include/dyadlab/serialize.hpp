#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dyadlab/tree_measure.hpp"

namespace dyadlab {

// Flat record stream (depth, coords, mass), level by level in key order.
//
// JSON:   {"format":"dyadlab-tree/1","dim":d,"max_depth":n,
//          "records":[[depth,[c0,c1],mass],...]}
// Binary: "DYTM", u32 version, u32 dim, u32 max_depth, u64 count, then per
//         record u32 depth, dim x i64 coords, f64 mass; all little-endian.
//
// Both forms reproduce every mass bit for bit.

std::string tree_to_json(const TreeMeasure& mu);
TreeMeasure tree_from_json(std::string_view text);

std::vector<std::uint8_t> tree_to_binary(const TreeMeasure& mu);
TreeMeasure tree_from_binary(std::span<const std::uint8_t> bytes);

}  // namespace dyadlab
