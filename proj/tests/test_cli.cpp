#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dyadlab/cli.hpp"

namespace fs = std::filesystem;
using dyadlab::cli::run;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("dyadlab-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int rc;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int rc = run(args, out, err);
  return {rc, out.str(), err.str()};
}

}  // namespace

TEST_CASE("describe") {
  auto d = json::parse(dyadlab::cli::describe("scan-bernoulli"));
  CHECK(d["subcommand"] == "scan-bernoulli");
  for (const char* k : {"lambda", "depth", "guard", "seed"}) CHECK(d["schema"]["properties"].contains(k));
  CHECK(d["schema"]["additionalProperties"] == false);
  CHECK(!d["example"]["command"].get<std::string>().empty());

  auto s = json::parse(dyadlab::cli::describe("scenery"));
  auto presets = s["schema"]["properties"]["preset"]["enum"];
  CHECK(std::find(presets.begin(), presets.end(), "four-corner-fiber") != presets.end());

  for (const auto& sub : dyadlab::cli::subcommands()) CHECK_NOTHROW(json::parse(dyadlab::cli::describe(sub)));

  auto r = call({"scann-bernoulli"});
  CHECK(r.rc == 2);
  CHECK(r.err.find("did you mean: scan-bernoulli") != std::string::npos);
  auto via = call({"describe", "porosity"});
  CHECK(via.rc == 0);
  CHECK(json::parse(via.out)["subcommand"] == "porosity");
}

TEST_CASE("sumset-growth output matches the frozen report") {
  ::unsetenv(dyadlab::cli::kCacheEnv);
  TempDir t;
  auto r = call({"sumset-growth", "--n", "12", "--out", t.path.string()});
  REQUIRE(r.rc == 0);
  auto j = json::parse(slurp(t.path / "sumset-growth.json"));
  CHECK(j["meta"]["tool"] == "dyadlab");
  CHECK(j["meta"]["subcommand"] == "sumset-growth");
  CHECK(j["meta"]["config"]["n"] == 12);
  auto fixture = json::parse(slurp(fs::path(DYADLAB_FIXTURES) / "sumset_growth_positive_n12.json"));
  CHECK(j["report"] == fixture);
}

TEST_CASE("outputs are deterministic and cached") {
  TempDir a, b, cache;
  ::unsetenv(dyadlab::cli::kCacheEnv);
  const std::vector<std::string> base{"project-cantor", "--theta-grid", "16", "--depth", "8"};
  auto args_a = base, args_b = base;
  args_a.insert(args_a.end(), {"--out", a.path.string(), "--jobs", "1"});
  args_b.insert(args_b.end(), {"--out", b.path.string(), "--jobs", "3"});
  REQUIRE(call(args_a).rc == 0);
  REQUIRE(call(args_b).rc == 0);
  for (const char* f : {"project-cantor.csv", "project-cantor.witness.json"})
    CHECK(slurp(a.path / f) == slurp(b.path / f));
  CHECK(slurp(a.path / "project-cantor.csv").rfind("# dyadlab ", 0) == 0);

  ::setenv(dyadlab::cli::kCacheEnv, cache.path.string().c_str(), 1);
  TempDir c, d;
  auto first = call({"porosity", "--n", "10", "--out", c.path.string()});
  REQUIRE(first.rc == 0);
  std::size_t entries = 0;
  for (auto& e : fs::directory_iterator(cache.path)) {
    ++entries;
    CHECK(fs::exists(e.path() / "complete"));
  }
  CHECK(entries == 1);
  auto second = call({"porosity", "--n", "10", "--out", d.path.string()});
  REQUIRE(second.rc == 0);
  CHECK(second.out.find("(cached)") != std::string::npos);
  CHECK(first.out.find("(cached)") == std::string::npos);
  CHECK(slurp(c.path / "porosity.json") == slurp(d.path / "porosity.json"));
  ::unsetenv(dyadlab::cli::kCacheEnv);
}

TEST_CASE("configuration errors") {
  TempDir t;
  const auto cfg = t.path / "cfg.json";
  {
    std::ofstream(cfg) << "{\n  \"bogus\": 1\n}\n";
  }
  auto r = call({"porosity", "--config", cfg.string(), "--out", t.path.string()});
  CHECK(r.rc == 2);
  CHECK(r.err.find("cfg.json:2: field 'bogus': unknown knob for porosity") != std::string::npos);

  {
    std::ofstream(cfg) << "{\n  \"n\": 12,\n  \"set\": 3,,\n}\n";
  }
  r = call({"porosity", "--config", cfg.string(), "--out", t.path.string()});
  CHECK(r.rc == 2);
  CHECK(r.err.find("cfg.json:3:") != std::string::npos);

  r = call({"porosity", "--n", "abc"});
  CHECK(r.rc == 2);
  CHECK(r.err.find("--n: invalid integer 'abc'") != std::string::npos);

  r = call({"porosity", "--set", "everything", "--out", t.path.string()});
  CHECK(r.rc == 2);
  CHECK(r.err.find("low-digits") != std::string::npos);

  // Budget failures are runtime errors with a hint.
  r = call({"entropy-profile", "--depth", "20", "--budget-log2", "8", "--out", t.path.string()});
  CHECK(r.rc == 1);
  CHECK(r.err.find("--budget-log2") != std::string::npos);

  // A config file overrides flags.
  {
    std::ofstream(cfg) << R"({"n": 8})";
  }
  ::unsetenv(dyadlab::cli::kCacheEnv);
  r = call({"sumset-growth", "--n", "12", "--config", cfg.string(), "--out", t.path.string()});
  REQUIRE(r.rc == 0);
  CHECK(json::parse(slurp(t.path / "sumset-growth.json"))["report"]["n"] == 8);
}
