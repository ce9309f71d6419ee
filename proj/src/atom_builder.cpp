#include "atom_builder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "dyadlab/error.hpp"
#include "dyadlab/kernels.hpp"

namespace dyadlab::detail {

namespace {

struct Node {
  double r;
  std::array<double, 2> s;
  double p;
  double acc;
};

inline bool terminal(double acc, double stop) { return acc >= stop - kStopSlack; }

inline Node extend(const Node& n, const AtomMap& m) {
  // f_{Ii}(x) = r_I (r_i x + s_i) + s_I
  return Node{n.r * m.r, {n.r * m.s[0] + n.s[0], n.r * m.s[1] + n.s[1]}, n.p * m.p, n.acc + m.logc};
}

struct Placer {
  const AtomSpec& spec;
  std::int64_t side;

  explicit Placer(const AtomSpec& sp) : spec(sp), side(std::int64_t{1} << sp.depth) {}

  std::int64_t axis(double x, int i) const {
    const double u = (x - spec.offset[i]) * spec.scale;
    auto c = static_cast<std::int64_t>(std::floor(std::ldexp(u, spec.depth)));
    return std::clamp<std::int64_t>(c, 0, side - 1);
  }

  std::uint64_t key(const Node& n) const {
    const double ax = n.r * spec.x0[0] + n.s[0];
    if (spec.dim == 1) return static_cast<std::uint64_t>(axis(ax, 0));
    const double ay = n.r * spec.x0[1] + n.s[1];
    return interleave2(static_cast<std::uint32_t>(axis(ax, 0)), static_cast<std::uint32_t>(axis(ay, 1)));
  }
};

struct WordCounter {
  std::vector<double> logc;          // distinct contraction exponents
  std::vector<std::uint64_t> mult;   // number of maps sharing each exponent
  double stop;
  std::uint64_t cap;
  std::map<std::vector<int>, std::uint64_t> memo;

  std::uint64_t count(std::vector<int>& used, double acc) {
    if (terminal(acc, stop)) return 1;
    if (auto it = memo.find(used); it != memo.end()) return it->second;
    std::uint64_t total = 0;
    for (std::size_t j = 0; j < logc.size(); ++j) {
      ++used[j];
      const std::uint64_t sub = count(used, acc + logc[j]);
      --used[j];
      const unsigned __int128 add = static_cast<unsigned __int128>(sub) * mult[j];
      total = (add >= cap || total + add >= cap) ? cap : total + static_cast<std::uint64_t>(add);
    }
    memo.emplace(used, total);
    return total;
  }
};

void check_maps(const std::vector<AtomMap>& maps) {
  if (maps.empty()) throw Error("empty IFS");
  for (const auto& m : maps) {
    if (!(m.logc > 0.0)) throw Error("map is not a contraction");
  }
}

}  // namespace

std::uint64_t count_words(const std::vector<AtomMap>& maps, double stop, std::uint64_t cap) {
  check_maps(maps);
  WordCounter wc;
  wc.stop = stop;
  wc.cap = cap;
  for (const auto& m : maps) {
    auto it = std::find_if(wc.logc.begin(), wc.logc.end(),
                           [&](double v) { return std::abs(v - m.logc) <= 1e-14 * v; });
    if (it == wc.logc.end()) {
      wc.logc.push_back(m.logc);
      wc.mult.push_back(1);
    } else {
      ++wc.mult[it - wc.logc.begin()];
    }
  }
  std::vector<int> used(wc.logc.size(), 0);
  return wc.count(used, 0.0);
}

TreeMeasure build_atoms_parallel(const std::vector<AtomMap>& maps, const AtomSpec& spec) {
  check_maps(maps);
  const Placer place(spec);
  const int cell_bits = spec.dim * spec.depth;
  const bool dense = cell_bits <= 20;
  const std::size_t ncells = dense ? (std::size_t{1} << cell_bits) : 0;

  // Breadth-first until there is enough independent work.
  std::vector<Node> frontier{Node{1.0, {0.0, 0.0}, 1.0, 0.0}};
  for (;;) {
    std::size_t open = 0;
    for (const auto& n : frontier) open += !terminal(n.acc, spec.stop);
    if (open == 0 || frontier.size() >= 256) break;
    std::vector<Node> next;
    next.reserve(frontier.size() * maps.size());
    for (const auto& n : frontier) {
      if (terminal(n.acc, spec.stop)) {
        next.push_back(n);
        continue;
      }
      for (const auto& m : maps) next.push_back(extend(n, m));
    }
    frontier = std::move(next);
  }

  std::vector<kernels::Fixed> dense_total(ncells, 0);
  std::unordered_map<std::uint64_t, kernels::Fixed> sparse_total;

#pragma omp parallel
  {
    std::vector<kernels::Fixed> local_dense(ncells, 0);
    std::unordered_map<std::uint64_t, kernels::Fixed> local_sparse;
    auto deposit = [&](const Node& n) {
      const std::uint64_t k = place.key(n);
      if (dense) {
        local_dense[k] += kernels::to_fixed(n.p);
      } else {
        local_sparse[k] += kernels::to_fixed(n.p);
      }
    };
    // Explicit stack keeps the recursion depth bounded by the word length.
    std::vector<Node> stack;
#pragma omp for schedule(dynamic, 1)
    for (std::ptrdiff_t fi = 0; fi < static_cast<std::ptrdiff_t>(frontier.size()); ++fi) {
      stack.clear();
      stack.push_back(frontier[fi]);
      while (!stack.empty()) {
        const Node n = stack.back();
        stack.pop_back();
        if (terminal(n.acc, spec.stop)) {
          deposit(n);
          continue;
        }
        for (const auto& m : maps) stack.push_back(extend(n, m));
      }
    }
#pragma omp critical(dyadlab_atom_merge)
    {
      if (dense) {
        for (std::size_t i = 0; i < ncells; ++i) dense_total[i] += local_dense[i];
      } else {
        for (const auto& [k, v] : local_sparse) sparse_total[k] += v;
      }
    }
  }

  std::vector<CellMass> leaves;
  if (dense) {
    for (std::size_t i = 0; i < ncells; ++i) {
      if (dense_total[i] != 0) leaves.push_back(CellMass{i, kernels::from_fixed(dense_total[i])});
    }
  } else {
    leaves.reserve(sparse_total.size());
    for (const auto& [k, v] : sparse_total) leaves.push_back(CellMass{k, kernels::from_fixed(v)});
  }
  return TreeMeasure::from_leaves(spec.dim, spec.depth, std::move(leaves));
}

namespace {

void dfs_serial(const std::vector<AtomMap>& maps, const AtomSpec& spec, const Placer& place,
                const Node& n, std::map<std::uint64_t, double>& out) {
  if (terminal(n.acc, spec.stop)) {
    out[place.key(n)] += n.p;
    return;
  }
  for (const auto& m : maps) dfs_serial(maps, spec, place, extend(n, m), out);
}

}  // namespace

TreeMeasure build_atoms_serial(const std::vector<AtomMap>& maps, const AtomSpec& spec) {
  check_maps(maps);
  const Placer place(spec);
  std::map<std::uint64_t, double> out;
  dfs_serial(maps, spec, place, Node{1.0, {0.0, 0.0}, 1.0, 0.0}, out);
  std::vector<CellMass> leaves;
  leaves.reserve(out.size());
  for (const auto& [k, m] : out) leaves.push_back(CellMass{k, m});
  return TreeMeasure::from_leaves(spec.dim, spec.depth, std::move(leaves));
}

}  // namespace dyadlab::detail
