#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "pcrpo/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "pcrpo: soft-switching constrained policy optimization on finite CMDPs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* train = app.add_subcommand(
      "train", "run seeded training from a JSON config, write CSV/JSON logs");
  train->add_option("--config", config_path, "run config path")->required();
  train->add_option("--override", overrides,
                    "key=value config override (repeatable)");

  long samples = 10000;
  std::vector<int> dims = {2, 8, 64};
  std::uint64_t seed = 1;
  bool serial = false;
  auto* vg = app.add_subcommand(
      "verify-gradients",
      "property sweep over random gradient pairs (orthogonality, norm "
      "identities, ascent, surgery comparison)");
  vg->add_option("--samples", samples, "pairs per dimension");
  vg->add_option("--dims", dims, "vector dimensions to sweep")->delimiter(',');
  vg->add_option("--seed", seed, "sweep seed");
  vg->add_flag("--serial", serial, "use the serial reference kernel");

  long instances = 100;
  std::uint64_t tseed = 1;
  bool tserial = false;
  auto* vt = app.add_subcommand(
      "verify-theorems",
      "check the one-step improvement bounds on random smooth quadratics");
  vt->add_option("--instances", instances, "number of random instances");
  vt->add_option("--seed", tseed, "sweep seed");
  vt->add_flag("--serial", tserial, "use the serial reference kernel");

  std::string sweep_path;
  int jobs = 0;
  auto* sweep = app.add_subcommand(
      "sweep", "run one training per axis value and write a comparison table");
  sweep->add_option("--spec", sweep_path, "sweep spec path")->required();
  sweep->add_option("--jobs", jobs, "parallel runs (default from the spec)");

  std::vector<std::string> run_dirs;
  std::string combined_out;
  auto* exp = app.add_subcommand(
      "export", "validate train logs and regenerate aggregate plot data");
  exp->add_option("--runs", run_dirs, "run directories")->required();
  exp->add_option("--out", combined_out, "optional combined aggregate CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (train->parsed()) {
    return pcrpo::cmd_train(config_path, overrides, std::cout, std::cerr);
  }
  if (vg->parsed()) {
    return pcrpo::cmd_verify_gradients(samples, dims, seed, !serial, std::cout,
                                       std::cerr);
  }
  if (vt->parsed()) {
    return pcrpo::cmd_verify_theorems(instances, tseed, !tserial, std::cout,
                                      std::cerr);
  }
  if (sweep->parsed()) {
    return pcrpo::cmd_sweep(sweep_path, jobs, std::cout, std::cerr);
  }
  if (exp->parsed()) {
    return pcrpo::cmd_export(run_dirs, combined_out, std::cout, std::cerr);
  }
  return 2;
}
