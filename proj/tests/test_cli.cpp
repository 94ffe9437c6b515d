#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "nuhlab/io.hpp"

using namespace nuhlab;
namespace fs = std::filesystem;

namespace {

const char* const kSmall =
    "validation.samples = 200\n"
    "lyapunov.n = 400\n"
    "lyapunov.samples = 4\n"
    "lyapunov.checkpoint = 100\n"
    "integral.samples = 200\n"
    "access.grid = 2\n"
    "survey.center_grid = 6\n"
    "survey.base_grid = 4\n"
    "survey.n_time = 200\n"
    "audit.samples = 50\n"
    "audit.n_time = 50\n"
    "avoidance.samples = 50\n"
    "avoidance.n = 50\n";

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("nuhlab_cli_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::path p = fs::temp_directory_path() / ("nuhlab_cli_" + name + ".cfg");
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args) {
  std::string cmd = std::string(NUHLAB_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void run_all(const cli::Context& ctx, const std::string& root) {
  RunDirectory dir(root, config_hash(ctx.config), serialize_config(ctx.config));
  cli::cmd_build(ctx, dir);
  cli::cmd_lyapunov(ctx, dir);
  cli::cmd_integrals(ctx, dir);
  cli::cmd_access(ctx, dir);
  cli::cmd_survey(ctx, dir);
}

}  // namespace

TEST(Commands, ByteDeterministicAcrossThreadCounts) {
  RunConfig c = parse_config(kSmall);
  fs::path a = scratch("det_a"), b = scratch("det_b");
  run_all({c, 1}, a.string());
  run_all({c, 3}, b.string());
  EXPECT_TRUE(RunDirectory::audit(a.string()).empty());
  EXPECT_TRUE(RunDirectory::audit(b.string()).empty());
  EXPECT_TRUE(cli::compare_trees(a.string(), b.string()).empty());
  EXPECT_GT(RunDirectory::listed_files(a.string()).size(), 20u);

  RunConfig other = c;
  other.seed = 2;
  fs::path d = scratch("det_seed");
  run_all({other, 1}, d.string());
  EXPECT_FALSE(cli::compare_trees(a.string(), d.string()).empty());
  for (const auto& p : {a, b, d}) fs::remove_all(p);
}

TEST(Commands, BuildChecksPass) {
  RunConfig c = parse_config(kSmall);
  fs::path root = scratch("build");
  RunDirectory dir(root.string(), config_hash(c), serialize_config(c));
  cli::CommandResult r = cli::cmd_build({c, 1}, dir);
  for (const auto& check : r.checks) EXPECT_TRUE(check.passed) << check.name << " " << check.value;
  EXPECT_TRUE(fs::exists(root / "build/pipeline.txt"));
  fs::remove_all(root);
}

TEST(Binary, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--bogus build"), 2);
  EXPECT_EQ(run("build --variant t5"), 2);
  EXPECT_EQ(run("build --config /nonexistent.cfg"), 2);
  EXPECT_EQ(run("build --config " + write_config("badkey", "no.such = 1\n").string()), 2);
  EXPECT_EQ(run("build --threads 0"), 2);
}

TEST(Binary, SupportContractViolationExitsOne) {
  fs::path out = scratch("contract");
  fs::path cfg = write_config("contract", std::string(kSmall) + "sw.support = 0.9\n");
  EXPECT_EQ(run("build --config " + cfg.string() + " --out " + out.string()), 1);
  fs::remove_all(out);
}

TEST(Binary, BuildSucceedsAndLeavesNoOrphans) {
  fs::path out = scratch("ok");
  fs::path cfg = write_config("ok", kSmall);
  EXPECT_EQ(run("build --config " + cfg.string() + " --seed 3 --threads 2 --out " + out.string()), 0);
  EXPECT_TRUE(RunDirectory::audit(out.string()).empty());
  RunConfig c = load_config((out / "config.txt").string());
  EXPECT_EQ(c.seed, 3u);
  EXPECT_EQ(run("keys"), 0);
  fs::remove_all(out);
}

TEST(Binary, ZeroAmplitudeGadgetsStillBuild) {
  fs::path out = scratch("trivial");
  fs::path cfg =
      write_config("trivial", std::string(kSmall) + "sw.amplitude = 0\nbm.angle = 0\ndw.amplitude = 0\n");
  EXPECT_EQ(run("build --config " + cfg.string() + " --out " + out.string()), 0);
  std::string text = read_file((out / "build/pipeline.txt").string());
  EXPECT_NE(text.find("sw gadget is trivial"), std::string::npos);
  fs::remove_all(out);
}
