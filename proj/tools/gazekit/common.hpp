#pragma once

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gazekit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Bad flag values found after parsing; mapped to exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --out if given, else $GAZEKIT_OUT joined with `sub`.
std::filesystem::path resolve_out(const std::string& flag, const std::string& sub = {});

/// Session directories below each path (a path holding manifest.json counts
/// itself), sorted.
std::vector<std::filesystem::path> find_sessions(const std::vector<std::string>& paths);

/// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads. The
/// first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);


}  // namespace gazekit::cli
