#include "dyadlab/grid_set.hpp"

#include <bit>
#include <numeric>
#include <sstream>

#include "dyadlab/error.hpp"

namespace dyadlab {

GridSet::GridSet(int n, std::uint64_t max_index) : n_(n), max_index_(max_index) {
  if (n < 0 || n > 30) throw Error("grid resolution out of range");
  if (max_index > (std::uint64_t{1} << 32)) throw Error("grid too large");
  words_.assign(max_index / 64 + 1, 0);
}

GridSet GridSet::unit(int n) { return GridSet(n, std::uint64_t{1} << n); }
GridSet GridSet::sums(int n) { return GridSet(n, std::uint64_t{1} << (n + 1)); }

GridSet GridSet::from_indices(int n, std::uint64_t max_index, std::span<const std::uint64_t> idx) {
  GridSet g(n, max_index);
  for (auto j : idx) g.insert(j);
  return g;
}

GridSet GridSet::progression(int n, std::uint64_t start, std::uint64_t step, std::uint64_t count) {
  GridSet g = unit(n);
  for (std::uint64_t i = 0; i < count; ++i) g.insert(start + i * step);
  return g;
}

std::uint64_t GridSet::size() const {
  std::uint64_t c = 0;
  for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
  return c;
}

bool GridSet::contains(std::uint64_t j) const {
  return j <= max_index_ && ((words_[j >> 6] >> (j & 63)) & 1U);
}

void GridSet::insert(std::uint64_t j) {
  if (j > max_index_) throw Error("grid index out of range");
  words_[j >> 6] |= std::uint64_t{1} << (j & 63);
}

void GridSet::erase(std::uint64_t j) {
  if (j <= max_index_) words_[j >> 6] &= ~(std::uint64_t{1} << (j & 63));
}

std::vector<std::uint64_t> GridSet::indices() const {
  std::vector<std::uint64_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      out.push_back(w * 64 + static_cast<std::uint64_t>(std::countr_zero(bits)));
      bits &= bits - 1;
    }
  }
  return out;
}

void GridSet::or_shifted(const GridSet& src, std::uint64_t shift) {
  if (src.n_ != n_) throw Error("resolution mismatch");
  if (src.empty()) return;
  const auto idx_max = src.indices().back();
  if (idx_max + shift > max_index_) throw Error("shifted set leaves the grid");
  const std::size_t ws = shift >> 6;
  const unsigned bs = shift & 63;
  for (std::size_t i = 0; i < src.words_.size(); ++i) {
    const std::uint64_t w = src.words_[i];
    if (!w) continue;
    words_[i + ws] |= w << bs;
    if (bs && i + ws + 1 < words_.size()) words_[i + ws + 1] |= w >> (64 - bs);
  }
}

GridSet& GridSet::operator|=(const GridSet& other) {
  if (other.n_ != n_ || other.max_index_ != max_index_) throw Error("resolution mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

GridSet& GridSet::operator&=(const GridSet& other) {
  if (other.n_ != n_ || other.max_index_ != max_index_) throw Error("resolution mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

bool GridSet::operator==(const GridSet& other) const {
  return n_ == other.n_ && max_index_ == other.max_index_ && words_ == other.words_;
}

std::string GridSet::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  const std::uint64_t den = std::uint64_t{1} << n_;
  for (auto j : indices()) {
    if (!first) os << ',';
    first = false;
    const std::uint64_t g = std::gcd(j, den);
    if (j == 0) {
      os << 0;
    } else if (den / g == 1) {
      os << j / g;
    } else {
      os << j / g << '/' << den / g;
    }
  }
  os << '}';
  return os.str();
}

}  // namespace dyadlab
