#include <CLI11.hpp>

#include <iostream>
#include <map>

#include "gmflow/runner.h"

int main(int argc, char** argv) {
  CLI::App app{"Gaussian matrix flows: spectral-measure simulation and limit-law diagnostics"};
  app.require_subcommand(1);

  gmflow::RunOptions options;
  std::string out_dir;
  std::uint64_t seed = 0;

  const std::map<std::string, std::string> help = {
      {"limit", "tabulate the limit law (pdf, cdf, Stieltjes transform)"},
      {"residual", "weak-equation residual over an ensemble"},
      {"converge", "Kolmogorov distance to the limit law, per n and t"},
      {"holder", "increment moments, Hoelder slope and Hoffman-Wielandt check"},
      {"collisions", "minimum spectral gap statistics"},
      {"dyson", "Brownian-case eigenvalue SDE against the matrix model"},
  };
  for (const auto& name : gmflow::subcommands()) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", options.config_path, "experiment config file, or a manifest.json to re-run")
        ->required();
    sub->add_option("--out", out_dir, "output directory (overrides GMFLOW_OUT_DIR and output.directory)");
    sub->add_option("--seed", seed, "master seed (overrides sampler.seed)");
    sub->add_option("--threads", options.threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    sub->callback([&, name, sub] {
      options.subcommand = name;
      if (sub->count("--out")) options.out_dir = out_dir;
      if (sub->count("--seed")) options.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gmflow::kExitConfig;
  }
  return gmflow::run_cli(options, std::cout, std::cerr);
}
