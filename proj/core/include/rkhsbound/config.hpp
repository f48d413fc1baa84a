#pragma once

#include <string>

#include "rkhsbound/experiments.hpp"
#include "rkhsbound/oracle.hpp"

namespace rkhsbound {

// Whole-run configuration: {problem, optimizer, experiment, io} sections of a
// single JSON file. Parsing is schema-checked; unknown keys are rejected.
struct RunConfig {
  RunConfig()
      : kf(KernelSpec::squared_exponential(1.0)), kw(KernelSpec::dirac()) {}

  KernelSpec kf;
  KernelSpec kw;
  double gamma_f_sq = 1.0;
  double gamma_w_sq = 1.0;

  SigmaOptimizerConfig optimizer;
  AreaComparisonConfig area;
  ControlStudyConfig control;
  OracleCheckConfig oracle_check;

  std::string out_dir = ".";
  bool json_output = false;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);  // empty path -> defaults

// Canonical defaults, pretty-printed; mirrors exactly what the parser accepts.
std::string default_config_text();

}  // namespace rkhsbound
