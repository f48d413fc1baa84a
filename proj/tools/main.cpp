#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "rkhsbound/cli.hpp"
#include "rkhsbound/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic uncertainty envelopes for kernel-based estimates "
               "under energy-bounded noise"};
  app.require_subcommand(0, 1);

  rkhsbound::CliOptions options;
  bool print_defaults = false;

  app.add_flag("--print-defaults", print_defaults, "Print the default config JSON and exit");
  app.add_option("--config", options.config_path, "Config file (JSON)");
  app.add_option("--seed", options.seed, "Master seed override")
      ->each([&](const std::string&) { options.has_seed = true; });
  app.add_option("--threads", options.threads, "Worker threads (0 = hardware)");
  app.add_flag("--json", options.json, "Also write JSON outputs");
  app.add_option("--out", options.out_dir, "Output directory");

  auto* bound = app.add_subcommand("bound", "Uncertainty envelope for a dataset");
  bound->add_option("--data", options.data_path, "Dataset CSV (header x_1,...,x_d,y)");
  bound->add_option("--grid", options.grid_specs,
                    "Query grid lo:hi:count (repeat per dimension)");
  bound->add_option("--query-csv", options.query_csv, "Query CSV (header x_1,...,x_d)");

  app.add_subcommand("compare", "Uncertainty-area comparison across dataset sizes");
  app.add_subcommand("safe-control", "Safe-control success-rate and timing study");
  app.add_subcommand("oracle-check", "Randomized bound-vs-oracle equivalence check");

  CLI11_PARSE(app, argc, argv);

  if (print_defaults) {
    std::cout << rkhsbound::default_config_text();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 1;
  }
  options.command = app.get_subcommands().front()->get_name();
  return rkhsbound::run_command(options);
}
