// Experiment runner: loads a JSON config, executes the described run with a
// fixed seed and writes trace CSVs plus a manifest.

#include <CLI11.hpp>

#include "tvg/csv.hpp"
#include "tvg/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tvgossip: consensus and decentralized optimization over time-varying graphs"};
  app.set_version_flag("--version", std::string(tvg::kLibraryVersion));

  std::string config_path;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();

  tvg::ExperimentOverrides overrides;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", overrides.out_dir, "output directory (default .)");
  app.add_option("--sweep", overrides.sweep, "run seeds seed..seed+k-1")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) overrides.seed = seed;

  return tvg::run_experiment(config_path, overrides);
}
