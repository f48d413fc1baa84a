#include "rkhsbound/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

namespace rkhsbound {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw BoundError(ErrorKind::InvalidInput,
                       "config: unknown key \"" + key + "\" in " + where);
    }
  }
}

KernelSpec parse_kernel(const json& obj, const std::string& where) {
  if (!obj.is_object() || !obj.contains("kind")) {
    throw BoundError(ErrorKind::InvalidInput, "config: " + where + " needs a \"kind\"");
  }
  const std::string kind = obj.at("kind").get<std::string>();
  if (kind == "se") {
    reject_unknown_keys(obj, {"kind", "lengthscale"}, where);
    return KernelSpec::squared_exponential(obj.value("lengthscale", 1.0));
  }
  if (kind == "dirac") {
    reject_unknown_keys(obj, {"kind"}, where);
    return KernelSpec::dirac();
  }
  if (kind == "linear") {
    reject_unknown_keys(obj, {"kind", "features", "degree"}, where);
    const std::string features = obj.value("features", "poly");
    if (features != "poly") {
      throw BoundError(ErrorKind::InvalidInput,
                       "config: only \"poly\" features are supported in " + where);
    }
    return KernelSpec::polynomial(obj.value("degree", 1));
  }
  if (kind == "scaled") {
    reject_unknown_keys(obj, {"kind", "scale", "base"}, where);
    if (!obj.contains("base")) {
      throw BoundError(ErrorKind::InvalidInput, "config: scaled kernel needs a base in " + where);
    }
    return KernelSpec::scaled(parse_kernel(obj.at("base"), where + ".base"),
                              obj.value("scale", 1.0));
  }
  throw BoundError(ErrorKind::InvalidInput, "config: unknown kernel kind \"" + kind + "\"");
}

json kernel_to_json(const KernelSpec& spec) {
  switch (spec.kind()) {
    case KernelKind::SquaredExponential:
      return {{"kind", "se"}, {"lengthscale", spec.lengthscale()}};
    case KernelKind::Dirac:
      return {{"kind", "dirac"}};
    case KernelKind::LinearFeatures:
      return {{"kind", "linear"}, {"features", "poly"}, {"degree", spec.feature_count() - 1}};
    case KernelKind::Scaled:
      return {{"kind", "scaled"}, {"scale", spec.output_scale()},
              {"base", kernel_to_json(spec.base())}};
  }
  return {};
}

void parse_optimizer(const json& obj, SigmaOptimizerConfig* opt) {
  reject_unknown_keys(obj, {"log_sigma_min", "log_sigma_max", "tol", "max_iters", "multistart"},
                      "optimizer");
  opt->log_sigma_min = obj.value("log_sigma_min", opt->log_sigma_min);
  opt->log_sigma_max = obj.value("log_sigma_max", opt->log_sigma_max);
  opt->tol = obj.value("tol", opt->tol);
  opt->max_iters = obj.value("max_iters", opt->max_iters);
  if (obj.contains("multistart")) {
    opt->multistart = obj.at("multistart").get<std::vector<double>>();
  }
  if (!(opt->log_sigma_min < opt->log_sigma_max)) {
    throw BoundError(ErrorKind::InvalidInput, "config: optimizer sigma range is empty");
  }
}

void parse_area(const json& obj, AreaComparisonConfig* area) {
  reject_unknown_keys(obj,
                      {"n_schedule", "trials", "domain", "lengthscale", "epsilon",
                       "confidence_p", "gamma_f_sq", "query_grid", "rkhs_centers"},
                      "experiment.area");
  if (obj.contains("n_schedule")) area->n_schedule = obj.at("n_schedule").get<std::vector<int>>();
  area->trials = obj.value("trials", area->trials);
  if (obj.contains("domain")) {
    const auto domain = obj.at("domain").get<std::vector<double>>();
    if (domain.size() != 2 || !(domain[0] < domain[1])) {
      throw BoundError(ErrorKind::InvalidInput, "config: experiment.area.domain must be [lo, hi]");
    }
    area->domain_lo = domain[0];
    area->domain_hi = domain[1];
  }
  area->lengthscale = obj.value("lengthscale", area->lengthscale);
  area->epsilon = obj.value("epsilon", area->epsilon);
  area->confidence_p = obj.value("confidence_p", area->confidence_p);
  area->gamma_f_sq = obj.value("gamma_f_sq", area->gamma_f_sq);
  area->query_grid = obj.value("query_grid", area->query_grid);
  area->rkhs_centers = obj.value("rkhs_centers", area->rkhs_centers);
}

void parse_control(const json& obj, ControlStudyConfig* control) {
  reject_unknown_keys(obj,
                      {"n_schedule", "repetitions", "state_grid", "state_domain", "epsilon",
                       "confidence_p", "gamma_f_sq", "subset_size"},
                      "experiment.control");
  if (obj.contains("n_schedule")) {
    control->n_schedule = obj.at("n_schedule").get<std::vector<int>>();
  }
  control->repetitions = obj.value("repetitions", control->repetitions);
  control->state_grid = obj.value("state_grid", control->state_grid);
  if (obj.contains("state_domain")) {
    const auto domain = obj.at("state_domain").get<std::vector<double>>();
    if (domain.size() != 2 || !(domain[0] < domain[1])) {
      throw BoundError(ErrorKind::InvalidInput,
                       "config: experiment.control.state_domain must be [lo, hi]");
    }
    control->state_lo = domain[0];
    control->state_hi = domain[1];
  }
  control->epsilon = obj.value("epsilon", control->epsilon);
  control->confidence_p = obj.value("confidence_p", control->confidence_p);
  control->gamma_f_sq = obj.value("gamma_f_sq", control->gamma_f_sq);
  control->subset_size = obj.value("subset_size", control->subset_size);
}

void parse_oracle(const json& obj, OracleCheckConfig* oracle) {
  reject_unknown_keys(obj,
                      {"instances", "n_min", "n_max", "budget_min", "budget_max", "gap_tol",
                       "train_point_query_fraction"},
                      "experiment.oracle");
  oracle->instances = obj.value("instances", oracle->instances);
  oracle->n_min = obj.value("n_min", oracle->n_min);
  oracle->n_max = obj.value("n_max", oracle->n_max);
  oracle->budget_min = obj.value("budget_min", oracle->budget_min);
  oracle->budget_max = obj.value("budget_max", oracle->budget_max);
  oracle->oracle.gap_tol = obj.value("gap_tol", oracle->oracle.gap_tol);
  oracle->train_point_query_fraction =
      obj.value("train_point_query_fraction", oracle->train_point_query_fraction);
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& err) {
    throw BoundError(ErrorKind::InvalidInput, std::string("config: ") + err.what());
  }
  if (!root.is_object()) {
    throw BoundError(ErrorKind::InvalidInput, "config: top level must be an object");
  }
  reject_unknown_keys(root, {"problem", "optimizer", "experiment", "io"}, "top level");

  RunConfig cfg;
  if (root.contains("problem")) {
    const json& problem = root.at("problem");
    reject_unknown_keys(problem, {"kf", "kw", "gamma_f_sq", "gamma_w_sq"}, "problem");
    if (problem.contains("kf")) cfg.kf = parse_kernel(problem.at("kf"), "problem.kf");
    if (problem.contains("kw")) cfg.kw = parse_kernel(problem.at("kw"), "problem.kw");
    cfg.gamma_f_sq = problem.value("gamma_f_sq", cfg.gamma_f_sq);
    cfg.gamma_w_sq = problem.value("gamma_w_sq", cfg.gamma_w_sq);
    if (!(cfg.gamma_f_sq > 0.0) || !(cfg.gamma_w_sq > 0.0)) {
      throw BoundError(ErrorKind::InvalidInput, "config: budgets must be > 0");
    }
  }
  if (root.contains("optimizer")) parse_optimizer(root.at("optimizer"), &cfg.optimizer);
  if (root.contains("experiment")) {
    const json& experiment = root.at("experiment");
    reject_unknown_keys(experiment, {"area", "control", "oracle"}, "experiment");
    if (experiment.contains("area")) parse_area(experiment.at("area"), &cfg.area);
    if (experiment.contains("control")) parse_control(experiment.at("control"), &cfg.control);
    if (experiment.contains("oracle")) parse_oracle(experiment.at("oracle"), &cfg.oracle_check);
  }
  if (root.contains("io")) {
    const json& io = root.at("io");
    reject_unknown_keys(io, {"out_dir", "json"}, "io");
    cfg.out_dir = io.value("out_dir", cfg.out_dir);
    cfg.json_output = io.value("json", cfg.json_output);
  }

  cfg.area.optimizer = cfg.optimizer;
  cfg.control.optimizer = cfg.optimizer;
  cfg.oracle_check.optimizer = cfg.optimizer;
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  std::ifstream in(path);
  if (!in) {
    throw BoundError(ErrorKind::InvalidInput, "config: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

std::string default_config_text() {
  const RunConfig cfg;
  json root;
  root["problem"] = {{"kf", kernel_to_json(cfg.kf)},
                     {"kw", kernel_to_json(cfg.kw)},
                     {"gamma_f_sq", cfg.gamma_f_sq},
                     {"gamma_w_sq", cfg.gamma_w_sq}};
  root["optimizer"] = {{"log_sigma_min", cfg.optimizer.log_sigma_min},
                       {"log_sigma_max", cfg.optimizer.log_sigma_max},
                       {"tol", cfg.optimizer.tol},
                       {"max_iters", cfg.optimizer.max_iters},
                       {"multistart", cfg.optimizer.multistart}};
  root["experiment"]["area"] = {{"n_schedule", cfg.area.n_schedule},
                                {"trials", cfg.area.trials},
                                {"domain", {cfg.area.domain_lo, cfg.area.domain_hi}},
                                {"lengthscale", cfg.area.lengthscale},
                                {"epsilon", cfg.area.epsilon},
                                {"confidence_p", cfg.area.confidence_p},
                                {"gamma_f_sq", cfg.area.gamma_f_sq},
                                {"query_grid", cfg.area.query_grid},
                                {"rkhs_centers", cfg.area.rkhs_centers}};
  root["experiment"]["control"] = {{"n_schedule", cfg.control.n_schedule},
                                   {"repetitions", cfg.control.repetitions},
                                   {"state_grid", cfg.control.state_grid},
                                   {"state_domain", {cfg.control.state_lo, cfg.control.state_hi}},
                                   {"epsilon", cfg.control.epsilon},
                                   {"confidence_p", cfg.control.confidence_p},
                                   {"gamma_f_sq", cfg.control.gamma_f_sq},
                                   {"subset_size", cfg.control.subset_size}};
  root["experiment"]["oracle"] = {
      {"instances", cfg.oracle_check.instances},
      {"n_min", cfg.oracle_check.n_min},
      {"n_max", cfg.oracle_check.n_max},
      {"budget_min", cfg.oracle_check.budget_min},
      {"budget_max", cfg.oracle_check.budget_max},
      {"gap_tol", cfg.oracle_check.oracle.gap_tol},
      {"train_point_query_fraction", cfg.oracle_check.train_point_query_fraction}};
  root["io"] = {{"out_dir", cfg.out_dir}, {"json", cfg.json_output}};
  return root.dump(2) + "\n";
}

}  // namespace rkhsbound
