#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "commands.hpp"
#include "nuhlab/anosov_katok.hpp"
#include "nuhlab/perturbations.hpp"

using namespace nuhlab;

namespace {

void print_checks(const cli::CommandResult& r) {
  for (const auto& c : r.checks)
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.value << " (bound " << c.bound << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially hyperbolic skew-product laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out", variant;
  std::uint64_t seed = 0;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.option_defaults()->always_capture_default();
  app.add_option("--config", config_path, "flat key = value configuration file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--variant", variant, "phase space variant")->check(CLI::IsMember({"t4", "t6"}));
  app.fallthrough();

  auto* build = app.add_subcommand("build", "construct the pipeline and run the structural validation suite");
  auto* lyapunov = app.add_subcommand("lyapunov", "Lyapunov spectra, convergence and oracles");
  auto* integrals = app.add_subcommand("integrals", "integrated central exponent and localization ratios");
  auto* access = app.add_subcommand("access", "su-quadrilateral reach raster and domination diagnostics");
  auto* survey = app.add_subcommand("survey", "phase-space classification, K audits, density and avoidance");
  auto* check = app.add_subcommand("check", "full acceptance suite, including a determinism rerun");
  auto* keys = app.add_subcommand("keys", "list configuration keys with their defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  RunConfig config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
    if (*seed_opt) config.seed = seed;
    if (!variant.empty()) config.variant = variant;
    config.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  if (*keys) {
    auto values = config_entries(config);
    for (const auto& [key, doc] : describe_config_keys()) std::cout << key << " = " << values[key] << "  # " << doc << "\n";
    return 0;
  }

  cli::Context ctx{config, threads};
  try {
    RunDirectory dir(out_dir, config_hash(config), serialize_config(config));
    cli::CommandResult result;
    if (*build) result = cli::cmd_build(ctx, dir);
    if (*lyapunov) result = cli::cmd_lyapunov(ctx, dir);
    if (*integrals) result = cli::cmd_integrals(ctx, dir);
    if (*access) result = cli::cmd_access(ctx, dir);
    if (*survey) result = cli::cmd_survey(ctx, dir);
    if (*check) {
      bool all = true;
      for (const auto& cr : cli::cmd_check(ctx, dir)) {
        std::cout << "criterion " << cr.id << " " << (cr.passed ? "PASS" : "FAIL") << " " << cr.title << ": "
                  << cr.detail << "\n";
        all = all && cr.passed;
      }
      return all ? 0 : 1;
    }
    print_checks(result);
    return result.passed() ? 0 : 1;
  } catch (const SupportContractError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
