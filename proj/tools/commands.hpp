#pragma once

#include <string>
#include <vector>

#include "nuhlab/config.hpp"
#include "nuhlab/io.hpp"

namespace nuhlab::cli {

// Acceptance tolerances.
namespace tol {
inline constexpr double kVolume = 1e-8;           // | |det Df| - 1 |
inline constexpr double kCatMap = 1e-3;           // Benettin vs +-log golden ratio squared
inline constexpr double kZeroSum = 1e-6;          // sum of a reported spectrum
inline constexpr double kInverse = 1e-9;          // torus distance of f^-1 f x to x
inline constexpr double kJacobianFd = 1e-5;       // relative gap to central differences
inline constexpr double kZ99 = 2.5758293035489;   // two-sided 99% normal quantile
inline constexpr double kSwLocalization = 0.1;
inline constexpr double kFullLocalization = 0.5;
inline constexpr double kReachFraction = 0.95;
inline constexpr double kDensityFraction = 0.99;
inline constexpr int kDominationSteps = 12;       // iterate power of the cone and bunching diagnostics
}  // namespace tol

struct Check {
  std::string name;
  int criterion = 0;  // acceptance criterion this check feeds (0: none)
  bool passed = false;
  std::string value;
  std::string bound;
};

struct CommandResult {
  std::vector<Check> checks;
  bool passed() const;
};

struct Context {
  RunConfig config;
  int threads = 1;
};

/// Each command writes its files through `dir`, records its checks there, and
/// rewrites the manifest.
CommandResult cmd_build(const Context& ctx, RunDirectory& dir);
CommandResult cmd_lyapunov(const Context& ctx, RunDirectory& dir);
CommandResult cmd_integrals(const Context& ctx, RunDirectory& dir);
CommandResult cmd_access(const Context& ctx, RunDirectory& dir);
CommandResult cmd_survey(const Context& ctx, RunDirectory& dir);

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
};

/// Runs every command into `out`, then runs them again into a scratch tree and
/// compares the two byte for byte (criterion 10). Writes check/acceptance.csv.
std::vector<CriterionResult> cmd_check(const Context& ctx, RunDirectory& dir);

/// Byte comparison of the manifest-listed files of two run trees; empty when identical.
std::vector<std::string> compare_trees(const std::string& a, const std::string& b);

}  // namespace nuhlab::cli
