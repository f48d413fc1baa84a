#include "rkhsbound/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "rkhsbound/io.hpp"

namespace rkhsbound {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Effective {
  RunConfig config;
  fs::path out_dir;
  bool json_output = false;
};

Effective resolve(const CliOptions& options) {
  Effective eff;
  eff.config = load_run_config(options.config_path);
  if (options.has_seed) {
    eff.config.area.master_seed = options.seed;
    eff.config.control.master_seed = options.seed;
    eff.config.oracle_check.seed = options.seed;
  }
  if (options.threads > 0) {
    eff.config.area.threads = options.threads;
    eff.config.control.threads = options.threads;
  }
  eff.out_dir = options.out_dir.empty() ? fs::path(eff.config.out_dir)
                                        : fs::path(options.out_dir);
  fs::create_directories(eff.out_dir);
  eff.json_output = options.json || eff.config.json_output;
  return eff;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw BoundError(ErrorKind::InvalidInput, "cannot write " + path.string());
  }
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

double percentile_of(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double idx = p * (static_cast<double>(values.size()) - 1.0);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

}  // namespace

int cmd_bound(const CliOptions& options) {
  const Effective eff = resolve(options);

  Dataset dataset;
  if (!options.data_path.empty()) {
    dataset = read_dataset_csv(options.data_path);
  }

  Matrix queries;
  if (!options.query_csv.empty()) {
    queries = read_query_csv(options.query_csv);
  } else {
    queries = parse_grid_specs(options.grid_specs);
  }
  if (dataset.inputs.rows() == 0 && dataset.inputs.cols() != queries.cols()) {
    dataset.inputs.resize(0, queries.cols());
    dataset.outputs.resize(0);
  }
  if (dataset.inputs.rows() > 0 && dataset.inputs.cols() != queries.cols()) {
    throw BoundError(ErrorKind::InvalidInput, "query dimension differs from the dataset");
  }

  const ProblemData data =
      make_problem_data(dataset.inputs, dataset.outputs, eff.config.kf, eff.config.kw,
                        eff.config.gamma_f_sq, eff.config.gamma_w_sq);

  // beta^2 does not depend on the query, so falsification is a data-set-level
  // verdict; probe the sigma range before touching any query.
  if (data.size() > 0) {
    const SigmaSweep sweep(data);
    std::vector<SigmaProbe> probes;
    bool any_feasible = false;
    const int grid = 33;
    for (int i = 0; i < grid; ++i) {
      const double t = eff.config.optimizer.log_sigma_min +
                       (eff.config.optimizer.log_sigma_max -
                        eff.config.optimizer.log_sigma_min) *
                           i / (grid - 1);
      const double sigma = std::pow(10.0, t);
      const double beta = sweep.beta_sq(sigma);
      probes.push_back({sigma, beta});
      any_feasible = any_feasible || beta >= 0.0;
    }
    if (!any_feasible) {
      const auto diag = classify_falsification(data, probes);
      std::cerr << describe(diag) << "\n";
      if (eff.json_output) {
        json summary;
        summary["errors"] = json::array({describe(diag)});
        open_out(eff.out_dir / "bounds.json") << summary.dump(2) << "\n";
      }
      return 2;
    }
  }

  const auto entries = envelope(data, queries, eff.config.optimizer);

  auto csv = open_out(eff.out_dir / "bounds.csv");
  for (Eigen::Index c = 0; c < queries.cols(); ++c) csv << "x_" << (c + 1) << ",";
  csv << "lower,upper,sigma_star_lower,sigma_star_upper,case_lower,case_upper\n";

  json records = json::array();
  json errors = json::array();
  int falsified = 0;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    const auto& entry = entries[static_cast<size_t>(i)];
    if (!entry.ok) {
      errors.push_back({{"query_index", i}, {"kind", to_string(entry.error_kind)},
                        {"message", entry.error}});
      if (entry.error_kind == ErrorKind::HypothesisFalsified) ++falsified;
      continue;
    }
    const BoundResult& r = entry.result;
    for (Eigen::Index c = 0; c < queries.cols(); ++c) {
      csv << format_double(queries(i, c)) << ",";
    }
    csv << format_double(r.lower) << "," << format_double(r.upper) << ","
        << format_double(r.sigma_star_lower) << "," << format_double(r.sigma_star_upper)
        << "," << to_string(r.case_lower) << "," << to_string(r.case_upper) << "\n";
    if (eff.json_output) {
      json record;
      record["x"] = std::vector<double>(queries.row(i).begin(), queries.row(i).end());
      record["lower"] = r.lower;
      record["upper"] = r.upper;
      record["sigma_star_lower"] = r.sigma_star_lower;
      record["sigma_star_upper"] = r.sigma_star_upper;
      record["case_lower"] = to_string(r.case_lower);
      record["case_upper"] = to_string(r.case_upper);
      records.push_back(std::move(record));
    }
  }
  if (eff.json_output) {
    json summary;
    summary["records"] = std::move(records);
    summary["errors"] = std::move(errors);
    open_out(eff.out_dir / "bounds.json") << summary.dump(2) << "\n";
  }
  for (const auto& err : errors) {
    std::cerr << err.dump() << "\n";
  }
  if (falsified > 0 && falsified == static_cast<int>(queries.rows())) return 2;
  return errors.empty() ? 0 : 1;
}

int cmd_compare(const CliOptions& options) {
  const Effective eff = resolve(options);
  const AreaComparisonResult result = run_area_comparison(eff.config.area);

  auto csv = open_out(eff.out_dir / "area_trials.csv");
  csv << "n,trial,area_optimal,area_relaxed_eps,area_prob,"
         "contained_optimal,contained_relaxed,contained_prob,ok\n";
  for (const auto& r : result.reports) {
    csv << r.n << "," << r.trial << "," << format_double(r.area_optimal) << ","
        << format_double(r.area_relaxed_eps) << "," << format_double(r.area_prob) << ","
        << r.contained_optimal << "," << r.contained_relaxed << "," << r.contained_prob
        << "," << r.ok << "\n";
  }

  // Wall times vary run to run; they live in a sidecar so the main outputs
  // stay byte-identical for a fixed (config, seed).
  auto timing = open_out(eff.out_dir / "area_timing.csv");
  timing << "n,trial,time_optimal,time_relaxed,time_prob\n";
  for (const auto& r : result.reports) {
    timing << r.n << "," << r.trial << "," << format_double(r.time_optimal) << ","
           << format_double(r.time_relaxed) << "," << format_double(r.time_prob) << "\n";
  }

  json summary;
  summary["per_n"] = json::array();
  for (size_t idx = 0; idx < eff.config.area.n_schedule.size(); ++idx) {
    const int n = eff.config.area.n_schedule[idx];
    std::vector<double> opt, rel, prob;
    int contained_opt = 0, contained_rel = 0, contained_prob = 0, ok_count = 0;
    for (const auto& r : result.reports) {
      if (r.n != n || !r.ok) continue;
      ++ok_count;
      opt.push_back(r.area_optimal);
      rel.push_back(r.area_relaxed_eps);
      prob.push_back(r.area_prob);
      contained_opt += r.contained_optimal;
      contained_rel += r.contained_relaxed;
      contained_prob += r.contained_prob;
    }
    json row;
    row["n"] = n;
    row["trials_ok"] = ok_count;
    const auto stats = [](std::vector<double> v) {
      return json{{"median", median_of(v)},
                  {"p5", percentile_of(v, 0.05)},
                  {"p95", percentile_of(v, 0.95)}};
    };
    row["optimal"] = stats(opt);
    row["relaxed_eps"] = stats(rel);
    row["prob"] = stats(prob);
    row["containment"] = {{"optimal", ok_count ? double(contained_opt) / ok_count : 0.0},
                          {"relaxed_eps", ok_count ? double(contained_rel) / ok_count : 0.0},
                          {"prob", ok_count ? double(contained_prob) / ok_count : 0.0}};
    summary["per_n"].push_back(std::move(row));
  }
  summary["failures"] = result.failures;
  summary["degraded"] = result.degraded;
  json errors = json::array();
  for (const auto& r : result.reports) {
    if (!r.ok) errors.push_back({{"n", r.n}, {"trial", r.trial}, {"message", r.error}});
  }
  summary["errors"] = std::move(errors);
  open_out(eff.out_dir / "area_summary.json") << summary.dump(2) << "\n";

  if (result.degraded) {
    std::cerr << "RunDegraded: " << result.failures << " trial failures\n";
    return 1;
  }
  return 0;
}

int cmd_safe_control(const CliOptions& options) {
  const Effective eff = resolve(options);
  const ControlStudyResult result = run_control_study(eff.config.control);

  auto csv = open_out(eff.out_dir / "control_trials.csv");
  csv << "method,n,rep,success_rate,feasible_count,safety_ok,ok\n";
  for (const auto& r : result.reports) {
    csv << to_string(r.method) << "," << r.n << "," << r.rep << ","
        << format_double(r.success_rate) << "," << r.feasible_count << "," << r.safety_ok
        << "," << r.ok << "\n";
  }

  auto timing = open_out(eff.out_dir / "control_timing.csv");
  timing << "method,n,rep,time_median,time_p5,time_p95\n";
  for (const auto& r : result.reports) {
    timing << to_string(r.method) << "," << r.n << "," << r.rep << ","
           << format_double(r.time_median) << "," << format_double(r.time_p5) << ","
           << format_double(r.time_p95) << "\n";
  }

  json summary;
  summary["per_method_n"] = json::array();
  for (const char* method :
       {"deterministic_full", "deterministic_subset", "probabilistic"}) {
    for (int n : eff.config.control.n_schedule) {
      std::vector<double> rates, medians;
      bool safety = true;
      int ok_count = 0;
      for (const auto& r : result.reports) {
        if (r.n != n || std::string(to_string(r.method)) != method || !r.ok) continue;
        ++ok_count;
        rates.push_back(r.success_rate);
        medians.push_back(r.time_median);
        safety = safety && r.safety_ok;
      }
      summary["per_method_n"].push_back({{"method", method},
                                         {"n", n},
                                         {"reps_ok", ok_count},
                                         {"success_rate_mean",
                                          rates.empty() ? 0.0
                                                        : std::accumulate(rates.begin(),
                                                                          rates.end(), 0.0) /
                                                              rates.size()},
                                         {"time_median_of_medians", median_of(medians)},
                                         {"safety_ok", safety}});
    }
  }
  summary["failures"] = result.failures;
  summary["degraded"] = result.degraded;
  json errors = json::array();
  for (const auto& r : result.reports) {
    if (!r.ok) {
      errors.push_back({{"method", to_string(r.method)}, {"n", r.n}, {"rep", r.rep},
                        {"message", r.error}});
    }
  }
  summary["errors"] = std::move(errors);
  open_out(eff.out_dir / "control_summary.json") << summary.dump(2) << "\n";

  if (result.degraded) {
    std::cerr << "RunDegraded: " << result.failures << " failures\n";
    return 1;
  }
  return 0;
}

int cmd_oracle_check(const CliOptions& options) {
  const Effective eff = resolve(options);
  const OracleCheckResult result = run_oracle_check(eff.config.oracle_check);

  auto csv = open_out(eff.out_dir / "oracle_check.csv");
  csv << "instance,n,kf,kw,bound_upper,oracle_upper,rel_diff_upper,"
         "bound_lower,oracle_lower,rel_diff_lower,gap_upper,gap_lower,"
         "case_upper,sigma_star_upper,sigma_from_multipliers,ok\n";
  for (const auto& r : result.records) {
    csv << r.instance << "," << r.n << "," << r.kf_kind << "," << r.kw_kind << ","
        << format_double(r.bound_upper) << "," << format_double(r.oracle_upper) << ","
        << format_double(r.rel_diff_upper) << "," << format_double(r.bound_lower) << ","
        << format_double(r.oracle_lower) << "," << format_double(r.rel_diff_lower) << ","
        << format_double(r.gap_upper) << "," << format_double(r.gap_lower) << ","
        << to_string(r.case_upper) << "," << format_double(r.sigma_star_upper) << ","
        << format_double(r.sigma_from_multipliers) << "," << r.ok << "\n";
  }

  std::cout << "instances: " << result.records.size() << "\n"
            << "max relative discrepancy: " << format_double(result.max_rel_diff) << "\n"
            << "max relative duality gap: " << format_double(result.max_gap) << "\n"
            << "failures: " << result.failures << "\n";

  const double tol = eff.config.oracle_check.oracle.gap_tol;
  return (result.failures == 0 && result.max_rel_diff <= tol) ? 0 : 1;
}

int run_command(const CliOptions& options) {
  try {
    if (options.command == "bound") return cmd_bound(options);
    if (options.command == "compare") return cmd_compare(options);
    if (options.command == "safe-control") return cmd_safe_control(options);
    if (options.command == "oracle-check") return cmd_oracle_check(options);
    std::cerr << "unknown command: " << options.command << "\n";
    return 1;
  } catch (const BoundError& err) {
    std::cerr << err.what() << "\n";
    return err.kind() == ErrorKind::HypothesisFalsified ? 2 : 1;
  } catch (const std::exception& err) {
    std::cerr << err.what() << "\n";
    return 1;
  }
}

}  // namespace rkhsbound
