// fsdt — collect offline trajectories, train (fsdt|cdt|fdt), evaluate,
// generate report artifacts and audit parameter counts.
//
// Exit codes: 0 success, 2 configuration error, 3 guard failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsdt/harness/commands.hpp"
#include "fsdt/harness/run_config.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated split decision transformer lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out_dir = "runs/default";
  int rounds = -1;
  std::string algo = "fsdt";

  app.add_option("--config", config_path, "run config JSON (defaults if omitted)");
  app.add_option("--seed", seeds, "seed list")->delimiter(',');
  app.add_option("--rounds", rounds, "override federation rounds");
  app.add_option("--out", out_dir, "output directory");

  auto* collect = app.add_subcommand("collect", "generate offline datasets");
  auto* train = app.add_subcommand("train", "train a model");
  train->add_option("--algo", algo, "fsdt|cdt|fdt")
      ->check(CLI::IsMember({"fsdt", "cdt", "fdt"}));
  auto* eval = app.add_subcommand("eval", "evaluate trained checkpoints");
  std::string eval_algo = "all";
  eval->add_option("--algo", eval_algo, "fsdt|cdt|fdt|all")
      ->check(CLI::IsMember({"fsdt", "cdt", "fdt", "all"}));
  auto* report = app.add_subcommand("report", "emit plot-ready artifacts");
  auto* params = app.add_subcommand("params", "parameter accounting table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    fsdt::harness::RunConfig cfg =
        config_path.empty() ? fsdt::harness::default_run_config()
                            : fsdt::harness::load_run_config(config_path);
    if (rounds >= 0) cfg.fed.rounds = rounds;
    if (seeds.empty()) {
      std::cerr << "error: seed list is empty\n";
      return kExitConfig;
    }

    if (collect->parsed()) {
      fsdt::harness::cmd_collect(cfg, seeds.front(), out_dir);
    } else if (train->parsed()) {
      fsdt::harness::cmd_train(cfg, algo, seeds, out_dir);
    } else if (eval->parsed()) {
      fsdt::harness::cmd_eval(cfg, eval_algo, seeds, out_dir);
    } else if (report->parsed()) {
      fsdt::harness::cmd_report(cfg, out_dir);
    } else if (params->parsed()) {
      fsdt::harness::cmd_params(cfg, std::cout);
    }
  } catch (const fsdt::harness::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fsdt::harness::GuardError& e) {
    std::cerr << "guard failure: " << e.what() << "\n";
    return kExitGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitGuard;
  }
  return 0;
}
