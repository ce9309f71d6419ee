#include "dyadlab/serialize.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "dyadlab/error.hpp"

namespace dyadlab {

static_assert(std::endian::native == std::endian::little, "binary format assumes little-endian");

namespace {

constexpr char kMagic[4] = {'D', 'Y', 'T', 'M'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("truncated tree stream");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

// Records arrive in level order; rebuild the level vectors and validate keys.
struct LevelBuilder {
  int dim;
  int depth;
  std::vector<std::vector<CellMass>> levels;

  LevelBuilder(int d, int n) : dim(d), depth(n), levels(n + 1) {}

  void add(int k, std::array<std::int64_t, 2> coords, double mass) {
    if (k < 0 || k > depth) throw Error("record depth out of range");
    DyadicCell c{dim, k, coords};
    levels[k].push_back(CellMass{morton_key(c), mass});
  }

  TreeMeasure finish() { return TreeMeasure::from_levels(dim, std::move(levels)); }
};

}  // namespace

std::string tree_to_json(const TreeMeasure& mu) {
  nlohmann::json j;
  j["format"] = "dyadlab-tree/1";
  j["dim"] = mu.dim();
  j["max_depth"] = mu.max_depth();
  auto recs = nlohmann::json::array();
  for (int k = 0; k <= mu.max_depth(); ++k) {
    for (const auto& c : mu.level(k)) {
      const DyadicCell cell = cell_from_key(mu.dim(), k, c.key);
      auto coords = nlohmann::json::array();
      for (int i = 0; i < mu.dim(); ++i) coords.push_back(cell.coords[i]);
      recs.push_back(nlohmann::json::array({k, coords, c.mass}));
    }
  }
  j["records"] = std::move(recs);
  return j.dump();
}

TreeMeasure tree_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("tree json: ") + e.what());
  }
  if (j.value("format", "") != "dyadlab-tree/1") throw Error("tree json: unknown format");
  LevelBuilder b(j.at("dim").get<int>(), j.at("max_depth").get<int>());
  for (const auto& r : j.at("records")) {
    std::array<std::int64_t, 2> coords{0, 0};
    const auto& cj = r.at(1);
    if (static_cast<int>(cj.size()) != b.dim) throw Error("tree json: coordinate arity");
    for (int i = 0; i < b.dim; ++i) coords[i] = cj.at(i).get<std::int64_t>();
    b.add(r.at(0).get<int>(), coords, r.at(2).get<double>());
  }
  return b.finish();
}

std::vector<std::uint8_t> tree_to_binary(const TreeMeasure& mu) {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mu.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mu.max_depth()));
  std::uint64_t count = 0;
  for (int k = 0; k <= mu.max_depth(); ++k) count += mu.level(k).size();
  put<std::uint64_t>(out, count);
  for (int k = 0; k <= mu.max_depth(); ++k) {
    for (const auto& c : mu.level(k)) {
      const DyadicCell cell = cell_from_key(mu.dim(), k, c.key);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(k));
      for (int i = 0; i < mu.dim(); ++i) put<std::int64_t>(out, cell.coords[i]);
      put<double>(out, c.mass);
    }
  }
  return out;
}

TreeMeasure tree_from_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw Error("not a DYTM stream");
  std::size_t pos = 4;
  if (get<std::uint32_t>(bytes, pos) != kVersion) throw Error("unsupported DYTM version");
  const int dim = static_cast<int>(get<std::uint32_t>(bytes, pos));
  const int depth = static_cast<int>(get<std::uint32_t>(bytes, pos));
  if (dim != 1 && dim != 2) throw Error("dimension must be 1 or 2");
  if (depth > max_key_depth(dim)) throw Error("depth out of range");
  const auto count = get<std::uint64_t>(bytes, pos);
  LevelBuilder b(dim, depth);
  for (std::uint64_t r = 0; r < count; ++r) {
    const int k = static_cast<int>(get<std::uint32_t>(bytes, pos));
    std::array<std::int64_t, 2> coords{0, 0};
    for (int i = 0; i < dim; ++i) coords[i] = get<std::int64_t>(bytes, pos);
    b.add(k, coords, get<double>(bytes, pos));
  }
  if (pos != bytes.size()) throw Error("trailing bytes in DYTM stream");
  return b.finish();
}

}  // namespace dyadlab
