#include "dyadlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyadlab/additive.hpp"
#include "dyadlab/entropy.hpp"
#include "dyadlab/error.hpp"
#include "dyadlab/ifs.hpp"
#include "dyadlab/ifs_file.hpp"
#include "dyadlab/kernels.hpp"
#include "dyadlab/overlaps.hpp"
#include "dyadlab/planar.hpp"
#include "dyadlab/reports.hpp"
#include "dyadlab/scan.hpp"
#include "dyadlab/scenery.hpp"
#include "dyadlab/transversality.hpp"
#include "json_util.hpp"

namespace dyadlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// Raised for anything the user can fix in the invocation; exit status 2.
struct UsageError : Error {
  using Error::Error;
};

enum class Kind { Int, Real, Text, Flag };

struct Knob {
  std::string name;
  Kind kind;
  std::string def;
  std::string help;
  std::vector<std::string> choices = {};
};

struct Artifact {
  std::string file;
  bool csv = false;
  std::string body;  // csv rows after the header line
  json report;       // json artifacts
};

class Ctx {
 public:
  explicit Ctx(const json& cfg) : cfg_(cfg) {}
  long long i(const std::string& k) const { return cfg_.at(k).get<long long>(); }
  int n(const std::string& k) const {
    const auto v = i(k);
    if (v < -(1LL << 30) || v > (1LL << 30)) throw UsageError("--" + k + " out of range");
    return static_cast<int>(v);
  }
  double d(const std::string& k) const { return cfg_.at(k).get<double>(); }
  std::string s(const std::string& k) const { return cfg_.at(k).get<std::string>(); }
  bool b(const std::string& k) const { return cfg_.at(k).get<bool>(); }
  std::uint64_t seed() const { return cfg_.at("seed").get<std::uint64_t>(); }

 private:
  const json& cfg_;
};

using Runner = std::function<std::vector<Artifact>(const Ctx&)>;

struct Command {
  std::string name;
  std::string summary;
  std::vector<Knob> knobs;
  std::vector<std::string> outputs;
  std::string example;
  std::string budget_hint;
  Runner run;
};

// ---- formatting ---------------------------------------------------------------

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Range {
  double lo, hi, step;
};

Range parse_range(const std::string& text, const std::string& knob) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      parts.push_back(static_cast<double>(parse_rational(item)));
    } catch (const Error&) {
      throw UsageError("--" + knob + ": expected lo:hi:step, got '" + text + "'");
    }
  }
  if (parts.size() != 3) throw UsageError("--" + knob + ": expected lo:hi:step, got '" + text + "'");
  if (!(parts[0] <= parts[1]) || !(parts[2] > 0.0)) throw UsageError("--" + knob + ": need lo <= hi and step > 0");
  return {parts[0], parts[1], parts[2]};
}

BuildOptions build_options(const Ctx& c) {
  BuildOptions o;
  o.guard = c.n("guard");
  const int b = c.n("budget-log2");
  if (b < 1 || b > 40) throw UsageError("--budget-log2 must lie in [1, 40]");
  o.budget = std::uint64_t{1} << b;
  return o;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1 - p) * std::log2(1 - p));
}

WeightedIFS middle_thirds() { return WeightedIFS::uniform({{1.0 / 3.0, 0.0}, {1.0 / 3.0, 2.0 / 3.0}}); }

TreeMeasure four_corner_fiber(int depth) {
  const auto tree = build_planar_tree(four_corner_ifs(), depth).measure;
  return strip_conditional(tree, Direction::from_pi_fraction(Rational(0)), 0.0, 2);
}

TreeMeasure digit03(int depth) {
  const std::vector<double> w{0.5, 0.0, 0.0, 0.5};
  return TreeMeasure::digit_measure(1, 2, w, depth);
}

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// ---- runners --------------------------------------------------------------------

std::vector<Artifact> run_scan_bernoulli(const Ctx& c) {
  const auto r = parse_range(c.s("lambda"), "lambda");
  if (r.lo <= 0.0 || r.hi >= 1.0) throw UsageError("--lambda must lie inside (0, 1)");
  const auto fam = ParametricFamily::bernoulli_convolution(r.lo, r.hi);
  const auto grid = grid_from_step(r.lo, r.hi, r.step);
  const int depth = c.n("depth");
  const auto prof = entropy_profile(fam, grid, depth, build_options(c));
  const auto dips = dip_detector(prof, c.d("threshold"), &fam, c.n("witness-depth"));
  std::vector<bool> flagged(grid.size(), false);
  for (const auto& f : dips.flags) flagged[f.index] = true;
  std::string rows = "t,n,entropy_bits,normalized,sd,deficit,flagged\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double deficit = std::min(1.0, prof.sd[i]) - prof.normalized[i];
    rows += fmt(prof.t[i]) + "," + std::to_string(depth) + "," + fmt(prof.entropy_bits[i]) + "," +
            fmt(prof.normalized[i]) + "," + fmt(prof.sd[i]) + "," + fmt(deficit) + "," +
            (flagged[i] ? "1" : "0") + "\n";
  }
  return {{"scan-bernoulli.csv", true, rows, {}},
          {"scan-bernoulli.dips.json", false, {}, report_json(dips)}};
}

WeightedIFS profile_ifs(const Ctx& c, std::string& label) {
  const std::string path = c.s("ifs");
  if (!path.empty()) {
    const auto desc = load_ifs_description(path);
    label = desc.name.empty() ? path : desc.name;
    return desc.resolve();
  }
  const std::string preset = c.s("preset");
  label = preset;
  if (preset == "cantor3") return middle_thirds();
  const double lam = c.d("lambda");
  if (!(lam > 0.0 && lam < 1.0)) throw UsageError("--lambda must lie inside (0, 1)");
  return WeightedIFS::uniform({{lam, 0.0}, {lam, 1.0}});
}

std::vector<Artifact> run_entropy_profile(const Ctx& c) {
  std::string label;
  const auto ifs = profile_ifs(c, label);
  const int depth = c.n("depth");
  const auto tree = build_tree_measure(ifs, depth, build_options(c));
  const double sd = ifs.similarity_dimension();
  std::string rows = "k,entropy_bits,normalized,sd\n";
  for (int k = 1; k <= depth; ++k) {
    const auto e = shannon_entropy(tree.measure, k);
    rows += std::to_string(k) + "," + fmt(e.entropy_bits) + "," + fmt(e.normalized) + "," + fmt(sd) + "\n";
  }
  return {{"entropy-profile.csv", true, rows, {}}};
}

ParametricFamily family_from(const Ctx& c, double lo, double hi) {
  const std::string path = c.s("ifs");
  if (path.empty()) return ParametricFamily::bernoulli_convolution(lo, hi);
  const auto desc = load_ifs_description(path);
  if (!desc.parametric) throw UsageError("--ifs: the description has no parameter t");
  return desc.family;
}

std::vector<Artifact> run_transversality(const Ctx& c) {
  const double lo = c.d("lo"), hi = c.d("hi");
  if (!(lo < hi)) throw UsageError("--lo must be below --hi");
  const auto fam = family_from(c, lo, hi);
  TransversalityOptions o;
  o.beta = c.d("beta");
  o.c_beta = c.d("c-beta");
  o.depth = c.n("depth");
  const int sb = c.n("stratum-budget-log2");
  if (sb < 1 || sb > 40) throw UsageError("--stratum-budget-log2 must lie in [1, 40]");
  o.stratum_budget = std::uint64_t{1} << sb;
  o.seed = c.seed();
  o.max_recorded = static_cast<std::size_t>(std::max(0, c.n("max-recorded")));
  const auto rep = transversality_audit(fam, lo, hi, uniform_grid(lo, hi, c.n("points")), o);
  return {{"transversality.json", false, {}, report_json(rep)}};
}

std::vector<Artifact> run_overlaps(const Ctx& c) {
  ParametricFamily fam;
  QuadraticNumber t;
  if (c.s("ifs").empty()) {
    fam = ParametricFamily::bernoulli_convolution(0.5, 0.8);
    t = golden_ratio_conjugate();
  } else {
    const auto desc = load_ifs_description(c.s("ifs"));
    if (!desc.exact_value) throw UsageError("--ifs: parameter.exact is required for exact search");
    fam = desc.family;
    t = *desc.exact_value;
  }
  const auto pairs = exact_overlap_search(fam, t, c.n("length"));
  json list = json::array();
  for (const auto& p : pairs) {
    const auto dj = delta_jet(fam, Coding::parse(p.first), Coding::parse(p.second), t.to_double());
    list.push_back({{"first", p.first},
                    {"second", p.second},
                    {"length", p.length},
                    {"delta", dj.delta},
                    {"delta_d1", dj.d1}});
  }
  json rep = {{"t", t.to_string()}, {"t_value", t.to_double()}, {"length", c.n("length")}, {"pairs", list}};
  return {{"overlaps.json", false, {}, rep}};
}

std::vector<Artifact> run_project_cantor(const Ctx& c) {
  const int m = c.n("theta-grid");
  if (m < 1) throw UsageError("--theta-grid must be positive");
  const auto ifs = four_corner_ifs();
  std::vector<Direction> dirs;
  for (int j = 0; j < m; ++j) dirs.push_back(Direction::from_pi_fraction(Rational(j, m)));
  const auto rows = direction_scan(ifs, dirs, c.n("depth"), build_options(c));
  std::string csv = "theta,theta_exact,depth,H_over_n,cover_count,interval_cover,merged_map_count\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    csv += fmt(r.theta) + "," + dirs[i].to_string() + "," + std::to_string(r.depth) + "," + fmt(r.h_over_n) +
           "," + std::to_string(r.cover_count) + "," + std::to_string(r.interval_cover) + "," +
           std::to_string(r.merged_map_count) + "\n";
  }
  json wit = json::array();
  const auto& maps = ifs.maps();
  for (std::size_t a = 0; a < maps.size(); ++a) {
    for (std::size_t b = a + 1; b < maps.size(); ++b) {
      const auto dir = coincidence_direction(maps[a].t, maps[b].t);
      wit.push_back({{"words", {std::to_string(a), std::to_string(b)}},
                     {"theta", dir.theta()},
                     {"theta_exact", dir.to_string()},
                     {"merged_maps", project_ifs(ifs, dir).merged_maps}});
    }
  }
  return {{"project-cantor.csv", true, csv, {}},
          {"project-cantor.witness.json", false, {}, {{"coincidences", wit}}}};
}

std::vector<Artifact> run_assouad(const Ctx& c) {
  const int depth = c.n("depth");
  const auto opt = build_options(c);
  TreeMeasure support;
  std::string label;
  if (c.s("set") == "four-corner") {
    support = build_planar_tree(four_corner_ifs(), depth, opt).measure;
    label = "four-corner";
  } else {
    Rational q;
    try {
      q = parse_rational(c.s("theta"));
    } catch (const Error&) {
      throw UsageError("--theta: expected a rational multiple of pi such as 1/4");
    }
    const auto dir = Direction::from_pi_fraction(q);
    support = build_tree_measure(project_ifs(four_corner_ifs(), dir).ifs, depth, opt).measure;
    label = "projection " + dir.to_string();
  }
  auto rep = report_json(assouad_estimate(support, c.n("k"), c.n("m")));
  rep["set"] = label;
  return {{"assouad.json", false, {}, rep}};
}

std::shared_ptr<const MeasureSource> scenery_source(const Ctx& c, double& reference) {
  const std::string preset = c.s("preset");
  const int l = c.n("l");
  if (preset == "bernoulli") {
    reference = binary_entropy(c.d("p"));
    return MeasureSource::bernoulli(c.d("p"), l);
  }
  if (preset == "lebesgue") {
    reference = c.n("dim");
    return MeasureSource::lebesgue(c.n("dim"), l);
  }
  if (preset == "digit03") {
    reference = 0.5;
    return MeasureSource::digit(1, 2, {0.5, 0.0, 0.0, 0.5}, l, "digit03");
  }
  const int depth = c.n("depth");
  if (static_cast<long long>(depth) < c.i("steps") + l)
    throw UsageError("--steps + --l exceeds --depth for the fixed-tree preset " + preset);
  if (preset == "cantor3") {
    reference = std::log(2.0) / std::log(3.0);
    return MeasureSource::fixed(build_tree_measure(middle_thirds(), depth, build_options(c)).measure, "cantor3");
  }
  reference = 0.5;
  return MeasureSource::fixed(four_corner_fiber(depth), "four-corner-fiber");
}

std::vector<Artifact> run_scenery(const Ctx& c) {
  double reference = 0.0;
  const auto src = scenery_source(c, reference);
  const auto steps = static_cast<std::size_t>(std::max(0LL, c.i("steps")));
  const int l = c.n("l");
  std::vector<CesaroStats> runs;
  const std::string x = c.s("x");
  if (!x.empty()) {
    std::vector<double> pt;
    std::stringstream ss(x);
    std::string item;
    while (std::getline(ss, item, ',')) pt.push_back(static_cast<double>(parse_rational(item)));
    runs.push_back(scenery_orbit(src, pt, steps, l, c.seed()));
  } else {
    runs = scenery_orbits(src, static_cast<std::size_t>(std::max(1, c.n("orbits"))), steps, l, c.seed());
  }
  std::string csv = "orbit,step,cell_coords,component_entropy_over_l,running_mean\n";
  json per = json::array();
  for (std::size_t o = 0; o < runs.size(); ++o) {
    const auto& r = runs[o];
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      std::string cell;
      if (src->dim() == 1) {
        cell = std::to_string(r.digits[k]);
      } else {
        cell = std::to_string(r.digits[k] & 1U) + ";" + std::to_string(r.digits[k] >> 1);
      }
      csv += std::to_string(o) + "," + std::to_string(k + 1) + "," + cell + "," + fmt(r.values[k]) + "," +
             fmt(r.running_mean[k]) + "\n";
    }
    per.push_back({{"seed", r.seed}, {"mean", r.mean()}});
  }
  json rep = {{"preset", c.s("preset")},
              {"source", src->name()},
              {"replenishable", src->replenishable()},
              {"steps", steps},
              {"l", l},
              {"orbits", per},
              {"pooled_mean", pooled_mean(runs)},
              {"reference", reference},
              {"gap", std::abs(pooled_mean(runs) - reference)}};
  return {{"scenery.csv", true, csv, {}}, {"scenery.json", false, {}, rep}};
}

TreeMeasure measure_preset(const Ctx& c, const std::string& preset, int depth) {
  if (preset == "lebesgue") return TreeMeasure::uniform(1, depth);
  if (preset == "bernoulli") return TreeMeasure::bernoulli(c.d("p"), depth);
  if (preset == "digit03") return digit03(depth);
  if (preset == "dirac") {
    const double x[1] = {c.d("x")};
    return TreeMeasure::dirac(x, depth);
  }
  if (preset == "cantor3") return build_tree_measure(middle_thirds(), depth).measure;
  if (preset == "lebesgue-atom") {
    // Half the mass uniform on [0, 1/2), half on the cell at 3/4.
    std::vector<CellMass> leaves;
    const std::uint64_t half = std::uint64_t{1} << (depth - 1);
    for (std::uint64_t k = 0; k < half; ++k) leaves.push_back({k, std::ldexp(1.0, -depth)});
    leaves.push_back({3 * (half >> 1), 0.5});
    return TreeMeasure::from_leaves(1, depth, std::move(leaves));
  }
  throw UsageError("unknown preset '" + preset + "'");
}

std::vector<Artifact> run_uniform_entropy(const Ctx& c) {
  const int n = c.n("n"), l = c.n("l");
  const int depth = c.n("depth") > 0 ? c.n("depth") : n + l;
  if (depth < n + l) throw UsageError("--depth must be at least --n + --l");
  const auto mu = measure_preset(c, c.s("preset"), depth);
  const auto res = uniform_entropy_statistic(mu, n, l, c.d("eps"), c.d("alpha"),
                                             static_cast<std::size_t>(std::max(0LL, c.i("samples"))), c.seed());
  auto rep = report_json(res);
  rep["preset"] = c.s("preset");
  return {{"uniform-entropy.json", false, {}, rep}};
}

std::vector<Artifact> run_spreading(const Ctx& c) {
  const int n = c.n("n"), l = c.n("l");
  const auto eta = measure_preset(c, c.s("preset"), n + l);
  const auto tr = c.s("translations") == "zero" ? std::vector<double>{0.0} : default_translations();
  const auto rep = spreading_check(eta, n, l, c.d("eps"), tr);
  std::string csv = "coord,mass,bad_fraction\n";
  for (const auto& p : rep.points) csv += std::to_string(p.coord) + "," + fmt(p.mass) + "," + fmt(p.bad_fraction) + "\n";
  auto j = report_json(rep);
  j["preset"] = c.s("preset");
  return {{"spreading.json", false, {}, j}, {"spreading.csv", true, csv, {}}};
}

std::vector<Artifact> run_sumset_growth(const Ctx& c) {
  ExperimentParams p;
  p.gamma = c.d("gamma");
  p.l = c.n("l");
  p.delta = c.d("delta");
  const int n = c.n("n");
  const std::string preset = c.s("preset");
  json rep;
  if (preset == "positive") {
    rep = report_json(positive_preset(n, p));
  } else if (preset == "failed") {
    rep = report_json(failed_preset(n, p));
  } else {
    rep = report_json(adversarial_search(n, p));
  }
  return {{"sumset-growth.json", false, {}, rep}};
}

std::vector<Artifact> run_regularize(const Ctx& c) {
  const int dim = c.n("dim"), T = c.n("T"), l = c.n("l");
  if (dim != 1 && dim != 2) throw UsageError("--dim must be 1 or 2");
  if (T < 1 || l < 1 || static_cast<long long>(dim) * T * l > 24) throw UsageError("--T and --l too large for --dim");
  const int depth = T * l;
  const std::string preset = c.s("preset");
  TreeMeasure mu;
  if (preset == "random") {
    std::mt19937_64 g(c.seed());
    const double keep = c.d("density");
    std::vector<CellMass> leaves;
    const std::uint64_t cells = std::uint64_t{1} << (dim * depth);
    for (std::uint64_t k = 0; k < cells; ++k) {
      const double u = uniform01(g);
      if (u >= keep) continue;
      leaves.push_back({k, std::pow(uniform01(g), 4) + 1e-300});
    }
    if (leaves.empty()) leaves.push_back({0, 1.0});
    mu = TreeMeasure::from_leaves(dim, depth, std::move(leaves));
  } else if (preset == "lebesgue") {
    mu = TreeMeasure::uniform(dim, depth);
  } else if (preset == "bernoulli") {
    if (dim != 1) throw UsageError("--preset bernoulli needs --dim 1");
    mu = TreeMeasure::bernoulli(c.d("p"), depth);
  } else {
    std::vector<double> x(static_cast<std::size_t>(dim), c.d("x"));
    mu = TreeMeasure::dirac(x, depth);
  }
  const auto res = regularize(mu, T, l);
  const auto chk = check_regularization(mu, res);
  auto rep = report_json(res, chk);
  rep["preset"] = preset;
  return {{"regularize.json", false, {}, rep}};
}

std::vector<Artifact> run_porosity(const Ctx& c) {
  const int n = c.n("n");
  if (n < 1 || n > 24) throw UsageError("--n must lie in [1, 24]");
  GridSet d;
  const std::string set = c.s("set");
  if (set == "low-digits") {
    d = base4_low_digit_set(n);
  } else if (set == "point") {
    d = GridSet::unit(n);
    const auto j = c.i("point");
    if (j < 0 || static_cast<std::uint64_t>(j) >= (std::uint64_t{1} << n)) throw UsageError("--point out of range");
    d.insert(static_cast<std::uint64_t>(j));
  } else {
    d = GridSet::unit(n);
    for (std::uint64_t j = 0; j < (std::uint64_t{1} << n); ++j) d.insert(j);
  }
  const auto mu = c.s("measure") == "bernoulli" ? TreeMeasure::bernoulli(c.d("p"), n) : TreeMeasure::uniform(1, n);
  auto rep = report_json(porosity_witness(mu, d, n, c.n("l"), c.d("tau"), c.d("gamma")));
  rep["set"] = set;
  rep["set_size"] = d.size();
  return {{"porosity.json", false, {}, rep}};
}

// ---- command table ---------------------------------------------------------------

const std::vector<Command>& commands() {
  static const std::vector<Command> table = [] {
    const Knob guard{"guard", Kind::Int, "6", "extra stopping-word depth below the output resolution"};
    const Knob budget{"budget-log2", Kind::Int, "26", "log2 of the stopping-word budget"};
    std::vector<Command> t;
    t.push_back({"scan-bernoulli",
                 "entropy profile H(mu_lambda, D_n)/n of Bernoulli convolutions and flagged dips",
                 {{"lambda", Kind::Text, "0.50:0.65:0.005", "parameter grid lo:hi:step"},
                  {"depth", Kind::Int, "14", "output resolution n"},
                  {"guard", Kind::Int, "0", guard.help},
                  budget,
                  {"threshold", Kind::Real, "0.02", "flag grid points with min(1, sd) - H/n above this"},
                  {"witness-depth", Kind::Int, "6", "longest word pair searched as a dip witness"}},
                 {"scan-bernoulli.csv", "scan-bernoulli.dips.json"},
                 "dyadlab scan-bernoulli --lambda 0.50:0.65:0.005 --depth 14",
                 "--depth, --guard or --budget-log2",
                 run_scan_bernoulli});
    t.push_back({"entropy-profile",
                 "H(mu, D_k)/k for k = 1..depth of one self-similar measure",
                 {{"preset", Kind::Text, "cantor3", "built-in measure", {"cantor3", "bernoulli"}},
                  {"ifs", Kind::Text, "", "IFS description file (overrides --preset)"},
                  {"lambda", Kind::Real, "0.5", "contraction of the bernoulli preset"},
                  {"depth", Kind::Int, "16", "largest k"},
                  guard,
                  budget},
                 {"entropy-profile.csv"},
                 "dyadlab entropy-profile --preset cantor3 --depth 16",
                 "--depth, --guard or --budget-log2",
                 run_entropy_profile});
    t.push_back({"transversality",
                 "beta-transversality audit of a parametric family over a parameter grid",
                 {{"ifs", Kind::Text, "", "parametric IFS description (default: Bernoulli convolutions)"},
                  {"lo", Kind::Real, "0.5", "parameter interval start"},
                  {"hi", Kind::Real, "0.6", "parameter interval end"},
                  {"points", Kind::Int, "101", "grid points including both ends"},
                  {"depth", Kind::Int, "8", "coding length"},
                  {"beta", Kind::Real, "1", "exponent beta"},
                  {"c-beta", Kind::Real, "0.02", "constant C_beta"},
                  {"stratum-budget-log2", Kind::Int, "18", "log2 of pairs per stratum before sampling"},
                  {"max-recorded", Kind::Int, "100", "violations kept in the report"}},
                 {"transversality.json"},
                 "dyadlab transversality --lo 0.5 --hi 0.6 --points 101 --depth 8",
                 "--depth or --stratum-budget-log2",
                 run_transversality});
    t.push_back({"overlaps",
                 "exact search for word pairs with identical maps at an algebraic parameter",
                 {{"ifs", Kind::Text, "", "IFS description with parameter.exact (default: golden-ratio Bernoulli)"},
                  {"length", Kind::Int, "6", "longest word length"}},
                 {"overlaps.json"},
                 "dyadlab overlaps --length 6",
                 "--length",
                 run_overlaps});
    t.push_back({"project-cantor",
                 "projections of the four-corner set over a grid of directions",
                 {{"theta-grid", Kind::Int, "256", "directions j pi / N, j < N"},
                  {"depth", Kind::Int, "12", "resolution n"},
                  {"guard", Kind::Int, "2", guard.help},
                  budget},
                 {"project-cantor.csv", "project-cantor.witness.json"},
                 "dyadlab project-cantor --theta-grid 256 --depth 12",
                 "--depth, --guard or --budget-log2",
                 run_project_cantor});
    t.push_back({"assouad",
                 "two-scale Assouad estimate of the four-corner set or a projection",
                 {{"set", Kind::Text, "four-corner", "support", {"four-corner", "projection"}},
                  {"theta", Kind::Text, "0", "projection direction as a multiple of pi (e.g. 1/4)"},
                  {"depth", Kind::Int, "10", "tree resolution, at least k + m"},
                  {"k", Kind::Int, "2", "coarse scale"},
                  {"m", Kind::Int, "8", "scale gap"},
                  {"guard", Kind::Int, "2", guard.help},
                  budget},
                 {"assouad.json"},
                 "dyadlab assouad --set projection --theta 0 --k 2 --m 8",
                 "--depth, --guard or --budget-log2",
                 run_assouad});
    t.push_back({"scenery",
                 "Cesaro averages of component entropies along magnification orbits",
                 {{"preset", Kind::Text, "bernoulli", "measure preset",
                   {"bernoulli", "cantor3", "four-corner-fiber", "lebesgue", "digit03"}},
                  {"p", Kind::Real, "0.3", "bernoulli weight of the left child"},
                  {"dim", Kind::Int, "1", "lebesgue dimension"},
                  {"steps", Kind::Int, "200", "magnifications N"},
                  {"l", Kind::Int, "8", "entropy scale l"},
                  {"orbits", Kind::Int, "1", "independent sampled orbits"},
                  {"x", Kind::Text, "", "start point (comma separated); empty samples it"},
                  {"depth", Kind::Int, "24", "tree depth of the fixed-tree presets (cantor3, four-corner-fiber)"},
                  {"guard", Kind::Int, "2", guard.help},
                  budget},
                 {"scenery.csv", "scenery.json"},
                 "dyadlab scenery --preset bernoulli --p 0.3 --steps 200 --l 8",
                 "--depth, --guard or --budget-log2",
                 run_scenery});
    t.push_back({"uniform-entropy",
                 "mass of points whose component entropies concentrate near alpha",
                 {{"preset", Kind::Text, "lebesgue-atom", "measure preset",
                   {"lebesgue", "lebesgue-atom", "bernoulli", "cantor3", "digit03", "dirac"}},
                  {"p", Kind::Real, "0.3", "bernoulli weight"},
                  {"x", Kind::Real, "0.3", "dirac location"},
                  {"n", Kind::Int, "12", "scales 1..n"},
                  {"l", Kind::Int, "6", "entropy scale l"},
                  {"eps", Kind::Real, "0.1", "tolerance"},
                  {"alpha", Kind::Real, "1", "target entropy dimension"},
                  {"samples", Kind::Int, "0", "Monte-Carlo points; 0 evaluates every cell"},
                  {"depth", Kind::Int, "0", "measure depth; 0 means n + l"}},
                 {"uniform-entropy.json"},
                 "dyadlab uniform-entropy --preset lebesgue-atom --n 12 --l 6",
                 "--n or --samples",
                 run_uniform_entropy});
    t.push_back({"spreading",
                 "(n, l, eps)-dyadic spreading check with candidate translations",
                 {{"preset", Kind::Text, "digit03", "measure preset", {"lebesgue", "dirac", "digit03", "bernoulli"}},
                  {"p", Kind::Real, "0.3", "bernoulli weight"},
                  {"x", Kind::Real, "0.3", "dirac location"},
                  {"n", Kind::Int, "16", "scales"},
                  {"l", Kind::Int, "3", "refinement gap"},
                  {"eps", Kind::Real, "0.1", "tolerance"},
                  {"translations", Kind::Text, "default", "candidate shifts", {"default", "zero"}}},
                 {"spreading.json", "spreading.csv"},
                 "dyadlab spreading --preset digit03 --n 16 --l 3 --translations zero",
                 "--n",
                 run_spreading});
    t.push_back({"sumset-growth",
                 "entropy-increase experiment on translate unions a + B_a",
                 {{"preset", Kind::Text, "positive", "instance", {"positive", "failed", "adversarial"}},
                  {"n", Kind::Int, "12", "grid resolution"},
                  {"gamma", Kind::Real, "0.25", "gamma"},
                  {"l", Kind::Int, "2", "spreading gap"},
                  {"delta", Kind::Real, "0.1", "delta"}},
                 {"sumset-growth.json"},
                 "dyadlab sumset-growth --n 12 --gamma 0.25 --preset positive",
                 "--n",
                 run_sumset_growth});
    t.push_back({"regularize",
                 "regular subtree selection with per-level branching rates",
                 {{"preset", Kind::Text, "random", "measure", {"random", "lebesgue", "bernoulli", "dirac"}},
                  {"dim", Kind::Int, "1", "dimension"},
                  {"T", Kind::Int, "3", "levels per block"},
                  {"l", Kind::Int, "4", "blocks"},
                  {"p", Kind::Real, "0.3", "bernoulli weight"},
                  {"x", Kind::Real, "0.3", "dirac location (every axis)"},
                  {"density", Kind::Real, "0.7", "fraction of leaves kept by the random preset"}},
                 {"regularize.json"},
                 "dyadlab regularize --preset random --T 3 --l 4 --seed 7",
                 "--T or --l",
                 run_regularize});
    t.push_back({"porosity",
                 "renormalized measure and mass bound for a porous grid set",
                 {{"set", Kind::Text, "low-digits", "grid set D", {"low-digits", "point", "full"}},
                  {"point", Kind::Int, "1234", "index of the single point set"},
                  {"measure", Kind::Text, "uniform", "measure mu", {"uniform", "bernoulli"}},
                  {"p", Kind::Real, "0.3", "bernoulli weight"},
                  {"n", Kind::Int, "12", "resolution"},
                  {"l", Kind::Int, "1", "block length"},
                  {"tau", Kind::Real, "0.5", "mass decay tau"},
                  {"gamma", Kind::Real, "0.25", "gamma"}},
                 {"porosity.json"},
                 "dyadlab porosity --set low-digits --n 12",
                 "--n",
                 run_porosity});
    for (auto& c : t) c.knobs.push_back({"seed", Kind::Int, "1", "random seed (recorded in every output)"});
    return t;
  }();
  return table;
}

const Command* find_command(const std::string& name) {
  for (const auto& c : commands())
    if (c.name == name) return &c;
  return nullptr;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

[[noreturn]] void unknown_subcommand(const std::string& name) {
  std::vector<std::pair<std::size_t, std::string>> scored;
  for (const auto& c : commands()) {
    std::size_t d = edit_distance(name, c.name);
    std::stringstream parts(c.name);
    for (std::string part; std::getline(parts, part, '-');) d = std::min(d, edit_distance(name, part) + 1);
    if (!name.empty() && c.name.find(name) != std::string::npos) d = std::min<std::size_t>(d, 1);
    scored.emplace_back(d, c.name);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<std::string> pick;
  for (const auto& [d, n] : scored)
    if (d <= 3) pick.push_back(n);
  std::string msg = "unknown subcommand '" + name + "'; ";
  if (pick.empty()) {
    msg += "available:";
    for (const auto& c : commands()) msg += " " + c.name;
  } else {
    msg += "did you mean:";
    for (std::size_t i = 0; i < pick.size() && i < 3; ++i) msg += " " + pick[i];
  }
  throw UsageError(msg);
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::Int: return "integer";
    case Kind::Real: return "number";
    case Kind::Flag: return "boolean";
    default: return "string";
  }
}

// Converts a flag string to the knob's JSON type.
json typed_value(const Knob& k, const std::string& text, const std::string& where) {
  auto bad = [&] { return UsageError(where + ": invalid " + kind_name(k.kind) + " '" + text + "'"); };
  switch (k.kind) {
    case Kind::Int: {
      long long v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size()) throw bad();
      return v;
    }
    case Kind::Real: {
      char* end = nullptr;
      const double v = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
        try {
          return static_cast<double>(parse_rational(text));
        } catch (const Error&) {
          throw bad();
        }
      }
      return v;
    }
    case Kind::Flag:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      throw bad();
    default:
      if (!k.choices.empty() && std::find(k.choices.begin(), k.choices.end(), text) == k.choices.end()) {
        std::string msg = where + ": '" + text + "' is not one of";
        for (const auto& ch : k.choices) msg += " " + ch;
        throw UsageError(msg);
      }
      return text;
  }
}

json defaults(const Command& cmd) {
  json j = json::object();
  for (const auto& k : cmd.knobs) j[k.name] = typed_value(k, k.def, "default --" + k.name);
  return j;
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n')) + 1;
}

void apply_config_file(const Command& cmd, const std::string& path, json& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = detail::parse_json_text(text, path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!j.is_object()) throw UsageError(path + ":1: expected a JSON object of knob values");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = it.key();
    const std::string where = path + ":" + std::to_string(line_of_key(text, key)) + ": field '" + key + "'";
    if (key == "subcommand") {
      if (!it->is_string() || it->get<std::string>() != cmd.name)
        throw UsageError(where + ": config is for a different subcommand");
      continue;
    }
    const auto k = std::find_if(cmd.knobs.begin(), cmd.knobs.end(), [&](const Knob& kb) { return kb.name == key; });
    if (k == cmd.knobs.end()) throw UsageError(where + ": unknown knob for " + cmd.name);
    const json& v = *it;
    switch (k->kind) {
      case Kind::Int:
        if (!v.is_number_integer()) throw UsageError(where + ": expected an integer");
        cfg[key] = v.get<long long>();
        break;
      case Kind::Real:
        if (v.is_number()) {
          cfg[key] = v.get<double>();
        } else if (v.is_string()) {
          cfg[key] = typed_value(*k, v.get<std::string>(), where);
        } else {
          throw UsageError(where + ": expected a number");
        }
        break;
      case Kind::Flag:
        if (!v.is_boolean()) throw UsageError(where + ": expected true or false");
        cfg[key] = v.get<bool>();
        break;
      default:
        if (!v.is_string()) throw UsageError(where + ": expected a string");
        cfg[key] = typed_value(*k, v.get<std::string>(), where);
    }
  }
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string render(const Artifact& a, const std::string& sub, const std::string& hash, std::uint64_t seed,
                   const json& cfg) {
  if (a.csv) {
    return "# dyadlab " DYADLAB_VERSION " " + sub + " config=" + hash + " seed=" + std::to_string(seed) + "\n" + a.body;
  }
  json j = {{"meta",
             {{"tool", "dyadlab"},
              {"version", DYADLAB_VERSION},
              {"subcommand", sub},
              {"config_hash", hash},
              {"seed", seed},
              {"config", cfg}}},
            {"report", a.report}};
  return dump_report(j);
}

int execute(const Command& cmd, json cfg, const std::string& out_dir, bool use_cache, std::ostream& out) {
  json hashed = cfg;
  hashed["subcommand"] = cmd.name;
  for (const char* key : {"ifs"}) {
    if (cfg.contains(key) && !cfg[key].get<std::string>().empty())
      hashed["ifs_content_fnv"] = hex16(fnv1a64(read_file(cfg[key].get<std::string>())));
  }
  const std::string hash = hex16(fnv1a64(hashed.dump() + "\n" DYADLAB_VERSION));
  const std::uint64_t seed = cfg.at("seed").get<std::uint64_t>();

  std::optional<fs::path> entry;
  if (const char* env = std::getenv(kCacheEnv); use_cache && env && *env) entry = fs::path(env) / (cmd.name + "-" + hash);

  if (entry && fs::exists(*entry / "complete")) {
    bool ok = true;
    for (const auto& f : cmd.outputs) ok = ok && fs::exists(*entry / f);
    if (ok) {
      for (const auto& f : cmd.outputs) {
        write_atomic(fs::path(out_dir) / f, read_file(*entry / f));
        out << "wrote " << (fs::path(out_dir) / f).string() << " (cached)\n";
      }
      return 0;
    }
  }

  std::vector<Artifact> arts;
  try {
    arts = cmd.run(Ctx(cfg));
  } catch (const UsageError&) {
    throw;
  } catch (const Error& e) {
    const std::string msg = e.what();
    if (msg.find("budget") != std::string::npos) throw Error(msg + " (adjust " + cmd.budget_hint + ")");
    throw;
  }
  for (const auto& a : arts) {
    const std::string bytes = render(a, cmd.name, hash, seed, cfg);
    write_atomic(fs::path(out_dir) / a.file, bytes);
    if (entry) write_atomic(*entry / a.file, bytes);
    out << "wrote " << (fs::path(out_dir) / a.file).string() << "\n";
  }
  if (entry) write_atomic(*entry / "complete", hash + "\n");
  return 0;
}

}  // namespace

std::vector<std::string> subcommands() {
  std::vector<std::string> v;
  for (const auto& c : commands()) v.push_back(c.name);
  return v;
}

std::string describe(const std::string& subcommand) {
  const Command* cmd = find_command(subcommand);
  if (!cmd) unknown_subcommand(subcommand);
  json props = json::object();
  std::vector<std::string> presets;
  for (const auto& k : cmd->knobs) {
    json p = {{"type", kind_name(k.kind)},
              {"default", typed_value(k, k.def, "default")},
              {"description", k.help}};
    if (!k.choices.empty()) p["enum"] = k.choices;
    if (k.name == "preset") presets = k.choices;
    props[k.name] = p;
  }
  json cfg = defaults(*cmd);
  cfg["subcommand"] = cmd->name;
  json j = {{"subcommand", cmd->name},
            {"summary", cmd->summary},
            {"schema", {{"type", "object"}, {"properties", props}, {"additionalProperties", false}}},
            {"outputs", cmd->outputs},
            {"global_options",
             {{"--out", "output directory (default: current directory)"},
              {"--config", "JSON file of knob values; overrides flags"},
              {"--jobs", "worker thread cap; does not change results"},
              {"--no-cache", std::string("ignore the cache directory named by ") + kCacheEnv}}},
            {"example", {{"command", cmd->example}, {"config", cfg}}}};
  if (!presets.empty()) j["presets"] = presets;
  return dump_report(j);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    if (args.empty()) throw UsageError("missing subcommand; try 'describe <subcommand>' or --help");
    const std::string& first = args.front();
    if (first == "describe") {
      if (args.size() != 2) throw UsageError("usage: describe <subcommand>");
      out << describe(args[1]);
      return 0;
    }
    if (!first.empty() && first[0] != '-' && !find_command(first)) unknown_subcommand(first);

    CLI::App app{"dyadlab: multiscale entropy and dyadic structure experiments"};
    app.require_subcommand(1, 1);
    std::string out_dir = ".";
    std::string config_path;
    int jobs = 0;
    bool no_cache = false;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--config", config_path, "JSON knob values; overrides flags");
    app.add_option("--jobs", jobs, "worker thread cap");
    app.add_flag("--no-cache", no_cache, "ignore the result cache");
    app.fallthrough();
    app.add_subcommand("describe", "print the schema and an example for a subcommand")
        ->add_option("name", "subcommand name");

    std::map<std::string, std::map<std::string, std::string>> values;
    std::map<std::string, std::map<std::string, bool>> flags;
    for (const auto& c : commands()) {
      auto* sub = app.add_subcommand(c.name, c.summary);
      for (const auto& k : c.knobs) {
        if (k.kind == Kind::Flag) {
          sub->add_flag("--" + k.name, flags[c.name][k.name], k.help);
        } else {
          sub->add_option("--" + k.name, values[c.name][k.name], k.help);
        }
      }
    }

    std::vector<std::string> storage{"dyadlab"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? 0 : 2;
    }

    const Command* cmd = nullptr;
    CLI::App* chosen = app.get_subcommands().front();
    cmd = find_command(chosen->get_name());
    if (!cmd) throw UsageError("missing subcommand");

    json cfg = defaults(*cmd);
    for (const auto& k : cmd->knobs) {
      if (chosen->count("--" + k.name) == 0) continue;
      if (k.kind == Kind::Flag) {
        cfg[k.name] = flags[cmd->name][k.name];
      } else {
        cfg[k.name] = typed_value(k, values[cmd->name][k.name], "--" + k.name);
      }
    }
    if (!config_path.empty()) apply_config_file(*cmd, config_path, cfg);

    kernels::set_threads(jobs);
    int status = 0;
    try {
      status = execute(*cmd, cfg, out_dir, !no_cache, out);
    } catch (...) {
      kernels::set_threads(0);
      throw;
    }
    kernels::set_threads(0);
    return status;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace dyadlab::cli
