#pragma once

#include <string>
#include <vector>

#include "rkhsbound/config.hpp"

namespace rkhsbound {

// Parsed command line; the thin binary in tools/ fills this in and calls
// run_command. Kept here so the commands are testable in-process.
struct CliOptions {
  std::string command;  // bound | compare | safe-control | oracle-check
  std::string config_path;
  std::string data_path;
  std::vector<std::string> grid_specs;
  std::string query_csv;
  std::string out_dir;  // overrides config io.out_dir when set
  bool json = false;    // or-ed with config io.json
  bool has_seed = false;
  uint64_t seed = 0;
  int threads = 0;
};

// Exit codes: 0 success, 2 budget falsification, 1 anything else.
int cmd_bound(const CliOptions& options);
int cmd_compare(const CliOptions& options);
int cmd_safe_control(const CliOptions& options);
int cmd_oracle_check(const CliOptions& options);

int run_command(const CliOptions& options);

}  // namespace rkhsbound
