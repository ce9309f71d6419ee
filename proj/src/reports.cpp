#include "dyadlab/reports.hpp"

#include <cmath>

namespace dyadlab {

using nlohmann::json;

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json report_json(const EntropyProfile& p) {
  json rows = json::array();
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    rows.push_back({{"t", p.t[i]},
                    {"entropy_bits", p.entropy_bits[i]},
                    {"normalized", p.normalized[i]},
                    {"sd", num(p.sd[i])}});
  }
  return {{"depth", p.depth}, {"guard", p.guard}, {"rows", rows}};
}

json report_json(const DipReport& r) {
  json flags = json::array();
  for (const auto& f : r.flags) {
    json w = nullptr;
    if (f.witness) {
      w = {{"first", f.witness->first},
           {"second", f.witness->second},
           {"length", f.witness->length},
           {"root", f.witness->root}};
    }
    flags.push_back({{"index", f.index}, {"t", f.t}, {"deficit", f.deficit}, {"witness", w}});
  }
  return {{"threshold", r.threshold}, {"flags", flags}};
}

json report_json(const TransversalityReport& r) {
  json strata = json::array();
  for (const auto& s : r.strata) {
    strata.push_back({{"shared_prefix", s.shared_prefix},
                      {"distance", s.distance},
                      {"pairs_total", s.pairs_total},
                      {"pairs_audited", s.pairs_audited},
                      {"exhaustive", s.exhaustive}});
  }
  json viol = json::array();
  for (const auto& v : r.violations) {
    viol.push_back({{"x", v.x}, {"y", v.y}, {"t", v.t}, {"delta", v.delta}, {"d1", v.d1}});
  }
  return {{"beta", r.beta},
          {"c_beta", r.c_beta},
          {"depth", r.depth},
          {"grid_points", r.grid.size()},
          {"grid_lo", r.grid.empty() ? json(nullptr) : json(r.grid.front())},
          {"grid_hi", r.grid.empty() ? json(nullptr) : json(r.grid.back())},
          {"pairs_audited", r.pairs_audited},
          {"evaluations", r.evaluations},
          {"violation_count", r.violation_count},
          {"violations", viol},
          {"strata", strata}};
}

json report_json(const AssouadEstimate& a) {
  json cells = json::array();
  for (const auto& [c, ratio] : a.ratios) {
    json coords = json::array();
    for (int i = 0; i < c.dim; ++i) coords.push_back(c.coords[i]);
    cells.push_back({{"coords", coords}, {"ratio", ratio}});
  }
  return {{"k", a.k}, {"m", a.m}, {"estimate", a.estimate}, {"cells", cells}};
}

json report_json(const UniformEntropyResult& r) {
  return {{"fraction", r.fraction}, {"exhaustive", r.exhaustive}, {"points", r.points}};
}

json report_json(const SpreadingReport& r, bool with_points) {
  json j = {{"n", r.n},
            {"l", r.l},
            {"eps", r.eps},
            {"translation", r.translation},
            {"good_mass", r.good_mass},
            {"candidate_good_mass", r.candidate_good_mass},
            {"point_count", r.points.size()},
            {"spreading", r.spreading}};
  if (with_points) {
    json pts = json::array();
    for (const auto& p : r.points)
      pts.push_back({{"coord", p.coord}, {"mass", p.mass}, {"bad_fraction", p.bad_fraction}});
    j["points"] = pts;
  }
  return j;
}

json report_json(const HypothesisFlags& h) {
  return {{"mass", h.mass},
          {"spreading", h.spreading},
          {"b_small", h.b_small},
          {"b_a_large", h.b_a_large},
          {"b_a_subset", h.b_a_subset},
          {"all", h.all()}};
}

json report_json(const GrowthReport& g) {
  return {{"n", g.n},
          {"size_a", g.size_a},
          {"size_b", g.size_b},
          {"b_a_sizes", g.b_a_sizes},
          {"sum_b_a", g.sum_b_a},
          {"max_b_a", g.max_b_a},
          {"union_size", g.union_size},
          {"exponent", opt(g.exponent)}};
}

namespace {
json params_json(const ExperimentParams& p) { return {{"gamma", p.gamma}, {"l", p.l}, {"delta", p.delta}}; }
}  // namespace

json report_json(const ExperimentReport& r) {
  return {{"n", r.n},
          {"params", params_json(r.params)},
          {"hypotheses", report_json(r.hypotheses)},
          {"eta_a", r.eta_a},
          {"min_spreading_count", r.min_spreading_count},
          {"spreading_needed", r.spreading_needed},
          {"growth", report_json(r.growth)},
          {"target", r.target},
          {"growth_verdict", r.growth_verdict}};
}

json report_json(const AdversarialReport& r) {
  json inst = json::array();
  for (const auto& i : r.instances) {
    inst.push_back({{"a_kind", i.a_kind},
                    {"step", i.step},
                    {"length", i.length},
                    {"window", i.window},
                    {"hypotheses", report_json(i.hypotheses)},
                    {"union_size", i.union_size},
                    {"exponent", i.exponent},
                    {"growth", i.growth}});
  }
  return {{"n", r.n},
          {"params", params_json(r.params)},
          {"instances", inst},
          {"min_exponent", opt(r.min_exponent)},
          {"counterexample", r.counterexample}};
}

json report_json(const BsgBridge& b) {
  return {{"g_size", b.g_size},
          {"sumset_size", b.sumset_size},
          {"energy", b.energy},
          {"log_l", b.log_l},
          {"delta", b.delta},
          {"cs_bound", b.cs_bound},
          {"bound", b.bound},
          {"bound_2delta", b.bound_2delta},
          {"holds", b.holds},
          {"holds_2delta", b.holds_2delta}};
}

json report_json(const RegularizationResult& r, const RegularizationCheck& c) {
  return {{"dim", r.dim},
          {"T", r.T},
          {"l", r.l},
          {"cell_count", r.cells.size()},
          {"sigma", r.sigma},
          {"ratio", r.ratio},
          {"retained_mass", r.retained_mass},
          {"mass_bound", r.mass_bound},
          {"check", {{"mass_ok", c.mass_ok}, {"ratio_ok", c.ratio_ok}, {"failure", c.failure}}}};
}

json report_json(const PorosityResult& r) {
  return {{"blocks", r.blocks},
          {"rho", r.rho},
          {"bound", r.bound},
          {"mu_d", r.mu_d},
          {"min_gain", num(r.min_gain)},
          {"pointwise_ok", r.pointwise_ok},
          {"points", r.points},
          {"bound_holds", r.mu_d <= r.bound}};
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

}  // namespace dyadlab
