#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dyadlab::cli {

/// Environment variable naming the result cache directory.  Unset disables
/// the cache.
inline constexpr const char* kCacheEnv = "DYADLAB_CACHE_DIR";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::vector<std::string> subcommands();

/// Schema (knobs with types, defaults and help), output files and one
/// runnable example, as JSON text.  Throws "unknown subcommand ..." with the
/// closest names for anything not in subcommands().
std::string describe(const std::string& subcommand);

/// Full command line without the program name, e.g.
///   {"sumset-growth", "--n", "12", "--out", "results"}.
/// Global options: --out DIR, --config FILE (JSON; overrides flags), --jobs N,
/// --no-cache.  Returns the process exit status: 0 success, 1 runtime
/// failure, 2 usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dyadlab::cli
