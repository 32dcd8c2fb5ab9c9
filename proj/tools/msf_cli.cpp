/// @file msf_cli.cpp
/// @brief Command-line entry point: msf <subcommand> --config PATH [options].

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "msf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Slow-fast transport-noise experiments on the 2D torus"};
  app.set_version_flag("--version", std::string(msf::kToolVersion));
  app.require_subcommand(1, 1);

  msf::CliOptions opts;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;
  std::string resume;
  std::size_t halt_after = 0;

  for (const auto& name : msf::subcommands()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "experiment configuration (JSON)")->required()->check(
        CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides outputs.dir)");
    sub->add_option("--seed", seed, "master seed (overrides run.seed)");
    sub->add_option("--replicas", replicas, "ensemble size M (overrides run.replicas)");
    sub->add_option("--resume", resume, "checkpoint file to continue from")->check(CLI::ExistingFile);
    sub->add_option("--halt-after", halt_after, "stop after this many new replicas")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : msf::kExitConfig;
  }

  auto* sub = app.get_subcommands().front();
  opts.command = sub->get_name();
  if (sub->count("--out")) opts.overrides.out_dir = out_dir;
  if (sub->count("--seed")) opts.overrides.seed = seed;
  if (sub->count("--replicas")) opts.overrides.replicas = replicas;
  if (sub->count("--resume")) opts.resume = resume;
  if (sub->count("--halt-after")) opts.halt_after = halt_after;
  return msf::run_cli(opts, std::cout, std::cerr);
}
