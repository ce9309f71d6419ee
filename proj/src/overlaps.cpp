#include "dyadlab/overlaps.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "dyadlab/error.hpp"

namespace dyadlab {

ExactIFS ExactIFS::from_family(const ParametricFamily& fam, const QuadraticNumber& t) {
  ExactIFS out;
  for (const auto& c : fam.exact_coefficients(t)) out.maps.push_back(ExactMap{c.r, c.s});
  return out;
}

QuadraticNumber golden_ratio_conjugate() { return {Rational(-1, 2), Rational(1, 2), 5}; }

namespace {

struct ExactWord {
  std::vector<std::uint8_t> symbols;
  QuadraticNumber r;
  QuadraticNumber s;
};

struct PairKeyLess {
  bool operator()(const std::pair<QuadraticNumber, QuadraticNumber>& a,
                  const std::pair<QuadraticNumber, QuadraticNumber>& b) const {
    QuadraticKeyLess less;
    if (less(a.first, b.first)) return true;
    if (less(b.first, a.first)) return false;
    return less(a.second, b.second);
  }
};

}  // namespace

std::vector<OverlapPair> exact_overlap_search(const ExactIFS& ifs, int n) {
  if (ifs.maps.empty()) throw Error("empty IFS");
  if (n < 1) throw Error("depth must be positive");
  const std::size_t b = ifs.maps.size();
  double count = 1;
  for (int i = 0; i < n; ++i) count *= static_cast<double>(b);
  if (count > static_cast<double>(std::uint64_t{1} << 22)) throw Error("budget exceeded");

  std::vector<OverlapPair> out;
  std::vector<ExactWord> level{ExactWord{{}, QuadraticNumber(1L), QuadraticNumber(0L)}};
  for (int len = 1; len <= n; ++len) {
    std::vector<ExactWord> next;
    next.reserve(level.size() * b);
    for (const auto& w : level) {
      for (std::size_t i = 0; i < b; ++i) {
        ExactWord e;
        e.symbols = w.symbols;
        e.symbols.push_back(static_cast<std::uint8_t>(i));
        e.s = w.r * ifs.maps[i].s + w.s;
        e.r = w.r * ifs.maps[i].r;
        next.push_back(std::move(e));
      }
    }
    level = std::move(next);
    std::map<std::pair<QuadraticNumber, QuadraticNumber>, std::vector<std::size_t>, PairKeyLess> groups;
    for (std::size_t i = 0; i < level.size(); ++i) groups[{level[i].r, level[i].s}].push_back(i);
    std::vector<OverlapPair> found;
    for (const auto& [key, idx] : groups) {
      for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t c = a + 1; c < idx.size(); ++c)
          found.push_back(OverlapPair{word_string(level[idx[a]].symbols, b),
                                      word_string(level[idx[c]].symbols, b), len});
    }
    std::sort(found.begin(), found.end(), [](const OverlapPair& x, const OverlapPair& y) {
      return std::tie(x.first, x.second) < std::tie(y.first, y.second);
    });
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

std::vector<OverlapPair> exact_overlap_search(const ParametricFamily& fam, const QuadraticNumber& t, int n) {
  return exact_overlap_search(ExactIFS::from_family(fam, t), n);
}

}  // namespace dyadlab
