#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fgsgd/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"FG-SGD on product manifolds: training, gradient checks and norm audits"};
  app.require_subcommand(1);

  std::string config;
  std::string checkpoint;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double width = 0.0;
  bool corrupt = false;

  auto* train = app.add_subcommand("train", "Train the configured net and write a run directory");
  train->add_option("config", config, "Experiment config (JSON)")->required();
  auto* seed_opt = train->add_option("--seed", seed, "Override the config's top-level seed");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the backward pass");
  gradcheck->add_option("config", config, "Experiment config (JSON)")->required();
  gradcheck->add_flag("--corrupt-gradient", corrupt)->group("");

  auto* norms = app.add_subcommand("norms", "Audit concatenated group norms of a checkpoint");
  norms->add_option("checkpoint", checkpoint, "checkpoint.json or its run directory")->required();

  auto* bounds = app.add_subcommand("bounds", "Evaluate generalization-bound functionals");
  bounds->add_option("checkpoint", checkpoint, "checkpoint.json or its run directory")->required();
  bounds->add_option("--samples", samples, "Training-set size N")->required();
  bounds->add_option("--width", width, "Network width")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fgsgd::kExitInputError;
  }

  if (*train) {
    std::optional<std::uint64_t> override;
    if (*seed_opt) override = seed;
    return fgsgd::cmd_train(config, override, std::cout, std::cerr);
  }
  if (*gradcheck) return fgsgd::cmd_gradcheck(config, std::cout, std::cerr, corrupt);
  if (*norms) return fgsgd::cmd_norms(checkpoint, std::cout, std::cerr);
  return fgsgd::cmd_bounds(checkpoint, samples, width, std::cout, std::cerr);
}
