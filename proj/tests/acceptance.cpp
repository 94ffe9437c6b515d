// Acceptance run on the default configuration: one line per criterion 1-10.
// Tolerances are the constants in commands.hpp (namespace tol).
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include "commands.hpp"

using namespace nuhlab;
namespace fs = std::filesystem;

int main(int argc, char** argv) {
  fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "nuhlab_acceptance";
  fs::remove_all(out);
  fs::remove_all(out.string() + ".rerun");
  RunConfig config;
  cli::Context ctx{config, static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};

  RunDirectory dir(out.string(), config_hash(config), serialize_config(config));
  std::vector<cli::CriterionResult> results = cli::cmd_check(ctx, dir);

  int failed = 0;
  for (const auto& r : results) {
    std::printf("criterion %2d %s  %s: %s\n", r.id, r.passed ? "PASS" : "FAIL", r.title.c_str(), r.detail.c_str());
    if (!r.passed) ++failed;
  }
  std::vector<std::string> problems = RunDirectory::audit(out.string());
  std::printf("manifest audit %s  %zu files, %zu problems\n", problems.empty() ? "PASS" : "FAIL",
              RunDirectory::listed_files(out.string()).size(), problems.size());
  for (const auto& p : problems) std::printf("  %s\n", p.c_str());
  if (!problems.empty()) ++failed;
  std::printf("%d of %zu criteria failed; outputs in %s\n", failed, results.size(), out.c_str());
  return failed == 0 ? 0 : 1;
}
