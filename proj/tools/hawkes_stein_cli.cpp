#include <CLI11.hpp>
#include <iostream>

#include "hawkes_stein/cli.hpp"

int main(int argc, char** argv) {
  using namespace hawkes_stein;
  CLI::App app{"Hawkes functionals: simulation, Wasserstein distances and rate fits"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides o;
  std::string config;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  int threads = 0;
  std::string out;
  double budget = 0.0;

  const std::vector<std::pair<const char*, const char*>> commands{
      {"simulate", "write accepted atoms (or discrete counts) for the first horizon"},
      {"resolvent", "tabulate the resolvent of the configured kernel"},
      {"dw", "functional samples, W1 distances and bound terms per horizon"},
      {"rate", "W1 sweep over horizons with a log-log slope verdict"},
      {"check", "run the invariant suite"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "base seed");
    sub->add_option("--reps", reps, "replications per horizon");
    sub->add_option("--threads", threads, "worker threads (fallback: HAWKES_STEIN_THREADS)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--budget", budget, "wall-clock cap in seconds");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  auto given = [&](const char* flag) { return sub->count(flag) > 0; };
  if (given("--config")) o.config_path = config;
  if (given("--seed")) o.seed = seed;
  if (given("--reps")) o.reps = reps;
  if (given("--threads")) o.threads = threads;
  if (given("--out")) o.out = out;
  if (given("--budget")) o.budget = budget;
  return run_cli(sub->get_name(), o, std::cout);
}
