#include "dyadlab/ifs_file.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace dyadlab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& field, const std::string& what) {
  throw Error(source + ": field '" + field + "': " + what);
}

std::optional<Rational> exact_scalar(const json& v) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  std::string text = v.is_string() ? v.get<std::string>() : v.dump();
  if (text.find_first_of("eE") != std::string::npos) return std::nullopt;
  try {
    return parse_rational(text);
  } catch (const Error&) {
    return std::nullopt;
  }
}

struct Coef {
  std::vector<double> values;
  std::optional<std::vector<Rational>> exact;
};

Coef read_coefficient(const json& v, const std::string& source, const std::string& field) {
  std::vector<json> items;
  if (v.is_array()) {
    if (v.empty()) fail(source, field, "empty coefficient array");
    items.assign(v.begin(), v.end());
  } else {
    items.push_back(v);
  }
  Coef c;
  std::vector<Rational> ex;
  bool all_exact = true;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    const std::string f = v.is_array() ? field + "[" + std::to_string(i) + "]" : field;
    if (it.is_number()) {
      c.values.push_back(it.get<double>());
    } else if (it.is_string()) {
      try {
        c.values.push_back(static_cast<double>(parse_rational(it.get<std::string>())));
      } catch (const Error& e) {
        fail(source, f, e.what());
      }
    } else {
      fail(source, f, "expected a number or a rational string");
    }
    if (!std::isfinite(c.values.back())) fail(source, f, "not finite");
    auto q = exact_scalar(it);
    if (q) {
      ex.push_back(*q);
    } else {
      all_exact = false;
    }
  }
  if (all_exact) c.exact = std::move(ex);
  return c;
}

Polynomial to_polynomial(const Coef& c) { return c.exact ? Polynomial(*c.exact) : Polynomial(c.values); }

double number_field(const json& obj, const char* key, const std::string& source, const std::string& prefix) {
  if (!obj.contains(key)) fail(source, prefix + key, "missing");
  const auto& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      return static_cast<double>(parse_rational(v.get<std::string>()));
    } catch (const Error& e) {
      fail(source, prefix + key, e.what());
    }
  }
  fail(source, prefix + key, "expected a number");
}

}  // namespace

WeightedIFS IfsDescription::resolve() const {
  if (value) return family.at(*value);
  if (exact_value) return family.at(exact_value->to_double());
  if (!parametric) return family.at(family.lo());
  throw Error("parameter value required");
}

IfsDescription parse_ifs_description(std::string_view text, const std::string& source) {
  const json j = detail::parse_json_text(text, source);
  if (!j.is_object()) fail(source, "<root>", "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& k = it.key();
    if (k != "name" && k != "alphabet" && k != "maps" && k != "weights" && k != "parameter")
      fail(source, k, "unknown field");
  }
  IfsDescription d;
  if (j.contains("name")) {
    if (!j["name"].is_string()) fail(source, "name", "expected a string");
    d.name = j["name"].get<std::string>();
  }
  if (!j.contains("maps") || !j["maps"].is_array() || j["maps"].empty())
    fail(source, "maps", "expected a nonempty array");
  const auto& maps = j["maps"];
  if (j.contains("alphabet")) {
    if (!j["alphabet"].is_number_integer() || j["alphabet"].get<long long>() != static_cast<long long>(maps.size()))
      fail(source, "alphabet", "does not match the number of maps");
  }
  std::vector<ParametricMap> pm;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string p = "maps[" + std::to_string(i) + "]";
    const auto& m = maps[i];
    if (!m.is_object()) fail(source, p, "expected an object with r and s");
    for (auto it = m.begin(); it != m.end(); ++it)
      if (it.key() != "r" && it.key() != "s") fail(source, p + "." + it.key(), "unknown field");
    if (!m.contains("r")) fail(source, p + ".r", "missing");
    if (!m.contains("s")) fail(source, p + ".s", "missing");
    const Coef r = read_coefficient(m["r"], source, p + ".r");
    const Coef s = read_coefficient(m["s"], source, p + ".s");
    if (r.values.size() > 1 || s.values.size() > 1) d.parametric = true;
    pm.push_back({to_polynomial(r), to_polynomial(s)});
  }
  std::vector<double> weights;
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    if (!w.is_array() || w.size() != maps.size()) fail(source, "weights", "expected one weight per map");
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!w[i].is_number() && !w[i].is_string())
        fail(source, "weights[" + std::to_string(i) + "]", "expected a number");
      weights.push_back(w[i].is_number() ? w[i].get<double>()
                                         : static_cast<double>(parse_rational(w[i].get<std::string>())));
      if (!(weights.back() > 0.0)) fail(source, "weights[" + std::to_string(i) + "]", "must be positive");
    }
    double total = 0.0;
    for (double x : weights) total += x;
    if (std::abs(total - 1.0) > 1e-12) fail(source, "weights", "must sum to 1");
  } else {
    weights.assign(maps.size(), 1.0 / static_cast<double>(maps.size()));
  }

  double lo = 0.0, hi = 0.0;
  if (j.contains("parameter")) {
    const auto& p = j["parameter"];
    if (!p.is_object()) fail(source, "parameter", "expected an object");
    for (auto it = p.begin(); it != p.end(); ++it) {
      const auto& k = it.key();
      if (k != "lo" && k != "hi" && k != "value" && k != "exact") fail(source, "parameter." + k, "unknown field");
    }
    lo = number_field(p, "lo", source, "parameter.");
    hi = number_field(p, "hi", source, "parameter.");
    if (!(lo <= hi)) fail(source, "parameter", "lo must not exceed hi");
    if (p.contains("value")) {
      d.value = number_field(p, "value", source, "parameter.");
      if (*d.value < lo || *d.value > hi) fail(source, "parameter.value", "outside [lo, hi]");
    }
    if (p.contains("exact")) {
      const auto& e = p["exact"];
      if (!e.is_object()) fail(source, "parameter.exact", "expected {a, b, d}");
      auto part = [&](const char* key) -> Rational {
        if (!e.contains(key)) return Rational(0);
        auto q = exact_scalar(e[key]);
        if (!q) fail(source, std::string("parameter.exact.") + key, "expected an exact rational");
        return *q;
      };
      long rad = 0;
      if (e.contains("d")) {
        if (!e["d"].is_number_integer()) fail(source, "parameter.exact.d", "expected an integer");
        rad = e["d"].get<long>();
      }
      try {
        d.exact_value = QuadraticNumber(part("a"), part("b"), rad);
      } catch (const Error& ex) {
        fail(source, "parameter.exact", ex.what());
      }
      const double tv = d.exact_value->to_double();
      if (tv < lo || tv > hi) fail(source, "parameter.exact", "outside [lo, hi]");
    }
  } else if (d.parametric) {
    fail(source, "parameter", "missing; required when a coefficient depends on t");
  }

  for (std::size_t i = 0; i < pm.size(); ++i) {
    const int samples = d.parametric ? 257 : 1;
    for (int k = 0; k < samples; ++k) {
      const double t = samples == 1 ? lo : lo + (hi - lo) * k / (samples - 1);
      const double r = pm[i].r(t);
      if (!(std::abs(r) < 1.0) || r == 0.0) {
        std::ostringstream os;
        os << "|r| must lie in (0, 1); r(" << t << ") = " << r;
        fail(source, "maps[" + std::to_string(i) + "].r", os.str());
      }
    }
  }
  d.family = ParametricFamily::polynomial(std::move(pm), std::move(weights), lo, hi);
  return d;
}

IfsDescription load_ifs_description(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ifs_description(ss.str(), path.string());
}

std::string ifs_description_schema() {
  const json coef = {{"oneOf",
                      {{{"type", "number"}},
                       {{"type", "string"}, {"description", "exact rational p/q or decimal"}},
                       {{"type", "array"}, {"description", "polynomial coefficients in t, increasing degree"}}}}};
  json schema = {
      {"type", "object"},
      {"required", {"maps"}},
      {"properties",
       {{"name", {{"type", "string"}}},
        {"alphabet", {{"type", "integer"}}},
        {"maps", {{"type", "array"}, {"items", {{"type", "object"}, {"required", {"r", "s"}},
                                                 {"properties", {{"r", coef}, {"s", coef}}}}}}},
        {"weights", {{"type", "array"}, {"items", {{"type", "number"}}}}},
        {"parameter",
         {{"type", "object"},
          {"required", {"lo", "hi"}},
          {"properties",
           {{"lo", {{"type", "number"}}},
            {"hi", {{"type", "number"}}},
            {"value", {{"type", "number"}}},
            {"exact", {{"type", "object"}, {"description", "t = a + b sqrt(d)"}}}}}}}}}};
  return schema.dump(2);
}

}  // namespace dyadlab
