#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "dyadlab/parametric.hpp"
#include "dyadlab/quadratic.hpp"

namespace dyadlab {

// IFS description file (JSON):
//
//   {
//     "name": "bernoulli",                  optional
//     "alphabet": 2,                        optional, must match maps
//     "maps": [ {"r": R, "s": S}, ... ],
//     "weights": [0.5, 0.5],                optional, uniform by default
//     "parameter": {                        required when any R/S uses t
//       "lo": 0.5, "hi": 0.8,
//       "value": 0.6,                       optional evaluation point
//       "exact": {"a": "-1/2", "b": "1/2", "d": 5}   optional, t = a + b sqrt d
//     }
//   }
//
// A coefficient is a number, a string "p/q" or decimal (exact), or an array
// [c0, c1, ...] of such values meaning c0 + c1 t + c2 t^2 + ...  Numbers are
// read through their shortest decimal form, so 0.1 means 1/10.  The parser
// rejects |r| >= 1 and r = 0 on a 257-point grid over the parameter interval.

struct IfsDescription {
  std::string name;
  ParametricFamily family;
  bool parametric = false;  // some coefficient depends on t
  std::optional<double> value;
  std::optional<QuadraticNumber> exact_value;

  /// The IFS at `value`, the exact value, or (non-parametric) anywhere.
  WeightedIFS resolve() const;
};

IfsDescription parse_ifs_description(std::string_view json_text, const std::string& source = "<ifs>");
IfsDescription load_ifs_description(const std::filesystem::path& path);

/// Machine-readable description of the format above.
std::string ifs_description_schema();

}  // namespace dyadlab
