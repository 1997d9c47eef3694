#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace m3s {

enum class CheckProfile { Quick, Full };

struct SuiteResult {
  std::string suite;
  int cases = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
};

struct CheckReport {
  std::uint64_t seed = 0;
  std::string profile;
  std::vector<int> ms;
  std::vector<SuiteResult> suites;

  bool pass() const;
  /// Deterministic for a given (ms, seed, profile).
  nlohmann::json to_json() const;
};

/// Runs the invariant suites of every module for each m in `ms`.
/// The full profile adds the exact polynomial identities up to m = 4 and
/// denser parameter sweeps.
CheckReport run_check(const std::vector<int>& ms, std::uint64_t seed, CheckProfile profile);

}  // namespace m3s
