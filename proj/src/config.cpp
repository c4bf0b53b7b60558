#include "dtr/config.hpp"

#include <fstream>

namespace dtr {

namespace {

using nlohmann::json;

double require_number(const json& node, const std::string& path) {
  if (!node.is_number()) throw ConfigError(path + " must be a number");
  return node.get<double>();
}

const json& require_field(const json& node, const std::string& key,
                          const std::string& path) {
  const auto it = node.find(key);
  if (it == node.end()) throw ConfigError(path + "." + key + " is required");
  return *it;
}

}  // namespace

std::vector<std::string> ExperimentConfig::design_columns() const {
  std::vector<std::string> columns = {"age", "blood_pressure", "exposure", "hormone"};
  for (const auto& extra : covariates.extra) columns.push_back(extra.name);
  if (include_income_in_design) columns.push_back("income");
  return columns;
}

ActionSet ExperimentConfig::stage_actions() const {
  std::vector<int> actions;
  for (std::size_t a = 1; a < cost_by_action.size(); ++a) {
    actions.push_back(static_cast<int>(a));
  }
  return ActionSet(std::vector<std::vector<int>>(num_stages, actions));
}

RewardParameters ExperimentConfig::reward_parameters() const {
  RewardParameters params;
  params.geographic_factor = reward_g;
  params.decay_rate = reward_lambda;
  params.cost_by_action = cost_by_action;
  params.horizon = horizon;
  params.num_stages = num_stages;
  params.income = 1.0;  // replaced per patient by the builders
  return params;
}

json ExperimentConfig::to_json() const {
  json doc;
  doc["seed"] = seed;
  doc["output"] = output_dir;

  doc["covariates"] = {
      {"age", {{"mean", covariates.age_mean}, {"sd", covariates.age_sd}}},
      {"blood_pressure", {{"offset", covariates.bp_offset}, {"sd", covariates.bp_sd}}},
      {"exposure", {{"rate", covariates.exposure_rate}}},
      {"hormone", {{"mean", covariates.hormone_mean}, {"sd", covariates.hormone_sd}}},
      {"income",
       {{"offset", covariates.income_offset},
        {"multiplier", covariates.income_multiplier},
        {"pareto_scale", covariates.income_pareto_scale},
        {"pareto_shape", covariates.income_pareto_shape}}}};
  json extra = json::array();
  for (const auto& column : covariates.extra) {
    extra.push_back({{"name", column.name}, {"rate", column.rate}});
  }
  doc["covariates"]["extra_binary"] = std::move(extra);

  json design = json::array();
  for (const auto& column : dynamics.design) {
    design.push_back(
        {{"name", column.name}, {"center", column.center}, {"scale", column.scale}});
  }
  json models = json::array();
  for (const auto& [key, p] : dynamics.params) {
    models.push_back({{"state", key.first},
                      {"action", key.second},
                      {"alpha", std::vector<double>(p.alpha.begin(), p.alpha.end())},
                      {"beta", std::vector<double>(p.beta.begin(), p.beta.end())}});
  }
  doc["dynamics"] = {{"design", std::move(design)}, {"models", std::move(models)}};
  doc["dynamics"]["initial_distribution"] = initial_distribution;

  json cost;
  for (std::size_t a = 1; a < cost_by_action.size(); ++a) {
    cost[std::to_string(a)] = cost_by_action[a];
  }
  doc["reward"] = {{"g", reward_g},
                   {"lambda", reward_lambda},
                   {"cost", std::move(cost)},
                   {"horizon", horizon},
                   {"stages", num_stages}};

  doc["fitting"] = {{"max_iterations", fitting.max_iterations},
                    {"gradient_tol", fitting.gradient_tol},
                    {"param_change_tol", fitting.param_change_tol},
                    {"per_epoch", fit_per_epoch},
                    {"include_income", include_income_in_design}};

  doc["cohort"] = {{"training_size", training_size}};
  doc["approach"] = {{"kind", approach == Approach::Adaptive ? "adaptive" : "nonadaptive"},
                     {"grid_covariates", grid_covariates}};

  json sens = json::array();
  for (const auto& request : sensitivity) {
    json entries = json::array();
    for (const auto& [t, s] : request.entries) entries.push_back({t, s});
    sens.push_back({{"covariate", request.covariate},
                    {"entries", std::move(entries)},
                    {"reps", request.reps},
                    {"points", request.points},
                    {"span_sd", request.span_sd}});
  }
  json cmp = json::array();
  for (const auto& pair : compare) {
    cmp.push_back({{"theta_lo", pair.theta_lo},
                   {"theta_hi", pair.theta_hi},
                   {"group_size", pair.group_size}});
  }
  doc["analysis"] = {{"sensitivity", std::move(sens)}, {"compare", std::move(cmp)}};
  return doc;
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig config;
  if (!doc.contains("seed")) {
    throw ConfigError("seed is required (no wall-clock default)");
  }
  if (!doc.at("seed").is_number_unsigned()) {
    throw ConfigError("seed must be an unsigned integer");
  }
  config.seed = doc.at("seed").get<std::uint64_t>();
  config.output_dir = doc.value("output", std::string("out"));

  if (doc.contains("covariates")) {
    const json& cov = doc.at("covariates");
    if (cov.contains("age")) {
      config.covariates.age_mean = require_number(require_field(cov.at("age"), "mean", "covariates.age"), "covariates.age.mean");
      config.covariates.age_sd = require_number(require_field(cov.at("age"), "sd", "covariates.age"), "covariates.age.sd");
    }
    if (cov.contains("blood_pressure")) {
      config.covariates.bp_offset = require_number(require_field(cov.at("blood_pressure"), "offset", "covariates.blood_pressure"), "covariates.blood_pressure.offset");
      config.covariates.bp_sd = require_number(require_field(cov.at("blood_pressure"), "sd", "covariates.blood_pressure"), "covariates.blood_pressure.sd");
    }
    if (cov.contains("exposure")) {
      config.covariates.exposure_rate = require_number(require_field(cov.at("exposure"), "rate", "covariates.exposure"), "covariates.exposure.rate");
    }
    if (cov.contains("hormone")) {
      config.covariates.hormone_mean = require_number(require_field(cov.at("hormone"), "mean", "covariates.hormone"), "covariates.hormone.mean");
      config.covariates.hormone_sd = require_number(require_field(cov.at("hormone"), "sd", "covariates.hormone"), "covariates.hormone.sd");
    }
    if (cov.contains("income")) {
      const json& income = cov.at("income");
      config.covariates.income_offset = require_number(require_field(income, "offset", "covariates.income"), "covariates.income.offset");
      config.covariates.income_multiplier = require_number(require_field(income, "multiplier", "covariates.income"), "covariates.income.multiplier");
      config.covariates.income_pareto_scale = require_number(require_field(income, "pareto_scale", "covariates.income"), "covariates.income.pareto_scale");
      config.covariates.income_pareto_shape = require_number(require_field(income, "pareto_shape", "covariates.income"), "covariates.income.pareto_shape");
    }
    for (const json& column : cov.value("extra_binary", json::array())) {
      config.covariates.extra.push_back(
          {column.at("name").get<std::string>(),
           require_number(require_field(column, "rate", "covariates.extra_binary"), "covariates.extra_binary.rate")});
    }
  }

  if (doc.contains("reward")) {
    const json& reward = doc.at("reward");
    config.reward_g = require_number(require_field(reward, "g", "reward"), "reward.g");
    config.reward_lambda =
        require_number(require_field(reward, "lambda", "reward"), "reward.lambda");
    config.horizon = require_field(reward, "horizon", "reward").get<int>();
    config.num_stages = require_field(reward, "stages", "reward").get<int>();
    const json& cost = require_field(reward, "cost", "reward");
    int max_action = 0;
    for (const auto& [key, value] : cost.items()) {
      (void)value;
      max_action = std::max(max_action, std::stoi(key));
    }
    config.cost_by_action.assign(max_action + 1, 0.0);
    for (const auto& [key, value] : cost.items()) {
      config.cost_by_action[std::stoul(key)] = require_number(value, "reward.cost." + key);
    }
  }

  if (doc.contains("dynamics")) {
    const json& dyn = doc.at("dynamics");
    config.dynamics.design.clear();
    for (const json& column : require_field(dyn, "design", "dynamics")) {
      config.dynamics.design.push_back({column.at("name").get<std::string>(),
                                        column.value("center", 0.0),
                                        column.value("scale", 1.0)});
    }
    for (const json& model : require_field(dyn, "models", "dynamics")) {
      GroundTruthDynamics::Params p;
      const auto alpha = model.at("alpha").get<std::vector<double>>();
      const auto beta = model.at("beta").get<std::vector<double>>();
      p.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(alpha.size()));
      p.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
      config.dynamics.params[{model.at("state").get<int>(), model.at("action").get<int>()}] = std::move(p);
    }
    config.initial_distribution =
        dyn.value("initial_distribution", std::vector<double>{});
  }
  config.dynamics.num_stages = config.num_stages;

  if (doc.contains("fitting")) {
    const json& fitting = doc.at("fitting");
    config.fitting.max_iterations = fitting.value("max_iterations", 100);
    config.fitting.gradient_tol = fitting.value("gradient_tol", 1e-8);
    config.fitting.param_change_tol = fitting.value("param_change_tol", 1e-10);
    config.fit_per_epoch = fitting.value("per_epoch", false);
    config.include_income_in_design = fitting.value("include_income", false);
  }

  if (doc.contains("cohort")) {
    config.training_size = doc.at("cohort").value("training_size", 500);
  }

  if (doc.contains("approach")) {
    const std::string kind = doc.at("approach").value("kind", "nonadaptive");
    if (kind == "adaptive") {
      config.approach = Approach::Adaptive;
    } else if (kind == "nonadaptive") {
      config.approach = Approach::NonAdaptive;
    } else {
      throw ConfigError("approach.kind must be 'nonadaptive' or 'adaptive'");
    }
    config.grid_covariates =
        doc.at("approach").value("grid_covariates", std::vector<std::string>{});
  }

  if (doc.contains("analysis")) {
    const json& analysis = doc.at("analysis");
    for (const json& node : analysis.value("sensitivity", json::array())) {
      SensitivityConfig request;
      request.covariate = node.at("covariate").get<std::string>();
      for (const json& entry : node.at("entries")) {
        request.entries.emplace_back(entry.at(0).get<int>(), entry.at(1).get<int>());
      }
      request.reps = node.value("reps", 100);
      request.points = node.value("points", 21);
      request.span_sd = node.value("span_sd", 3.0);
      config.sensitivity.push_back(std::move(request));
    }
    for (const json& node : analysis.value("compare", json::array())) {
      config.compare.push_back({require_number(require_field(node, "theta_lo", "analysis.compare"), "analysis.compare.theta_lo"),
                                require_number(require_field(node, "theta_hi", "analysis.compare"), "analysis.compare.theta_hi"),
                                node.value("group_size", 100)});
    }
  }

  config.validate();
  return config;
}

void ExperimentConfig::validate() const {
  if (num_stages < 2) throw ConfigError("reward.stages must be >= 2");
  if (horizon < 2) throw ConfigError("reward.horizon must be >= 2");
  if (reward_g <= 0.0) throw ConfigError("reward.g must be positive");
  if (reward_lambda < 0.0) throw ConfigError("reward.lambda must be non-negative");
  if (cost_by_action.size() < 2) throw ConfigError("reward.cost must define action 1");
  if (cost_by_action[1] != 0.0) {
    throw ConfigError("reward.cost.1 (remission) must be 0");
  }
  if (covariates.age_sd <= 0.0) throw ConfigError("covariates.age.sd must be positive");
  if (covariates.bp_sd <= 0.0) {
    throw ConfigError("covariates.blood_pressure.sd must be positive");
  }
  if (covariates.exposure_rate < 0.0 || covariates.exposure_rate > 1.0) {
    throw ConfigError("covariates.exposure.rate must lie in [0, 1]");
  }
  if (covariates.hormone_sd <= 0.0) {
    throw ConfigError("covariates.hormone.sd must be positive");
  }
  if (covariates.income_offset <= 0.0 || covariates.income_multiplier <= 0.0 ||
      covariates.income_pareto_scale <= 0.0 || covariates.income_pareto_shape <= 0.0) {
    throw ConfigError("covariates.income parameters must be positive");
  }
  if (training_size < 1) throw ConfigError("cohort.training_size must be >= 1");
  if (!initial_distribution.empty()) {
    if (initial_distribution.size() != static_cast<std::size_t>(num_stages)) {
      throw ConfigError("dynamics.initial_distribution must have one entry per stage");
    }
    double sum = 0.0;
    for (double p : initial_distribution) {
      if (p < 0.0) throw ConfigError("dynamics.initial_distribution entries must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ConfigError("dynamics.initial_distribution must sum to 1");
    }
  }
  if (!dynamics.params.empty()) {
    GroundTruthDynamics checked = dynamics;
    checked.num_stages = num_stages;
    checked.validate();
    const ActionSet actions = stage_actions();
    for (int s = 1; s <= num_stages; ++s) {
      for (int a : actions.for_state(s)) {
        if (dynamics.params.find({s, a}) == dynamics.params.end()) {
          throw ConfigError("dynamics.models missing state " + std::to_string(s) +
                            ", action " + std::to_string(a));
        }
      }
    }
    for (const auto& column : dynamics.design) {
      // Raises if a design column names an unknown covariate.
      CovariateProfile probe;
      probe.extra_names.reserve(covariates.extra.size());
      for (const auto& extra : covariates.extra) {
        probe.extra_names.push_back(extra.name);
        probe.extra.push_back(0.0);
      }
      try {
        probe.value(column.name);
      } catch (const std::invalid_argument&) {
        throw ConfigError("dynamics.design references unknown covariate '" +
                          column.name + "'");
      }
    }
  }
  for (const auto& request : sensitivity) {
    if (request.reps < 1) throw ConfigError("analysis.sensitivity.reps must be >= 1");
    if (request.points < 2) throw ConfigError("analysis.sensitivity.points must be >= 2");
    for (const auto& [t, s] : request.entries) {
      if (t < 1 || t > horizon - 1 || s < 1 || s > num_stages) {
        throw ConfigError("analysis.sensitivity entry (" + std::to_string(t) + ", " +
                          std::to_string(s) + ") out of range");
      }
    }
  }
  for (const auto& pair : compare) {
    if (pair.theta_lo <= 0.0 || pair.theta_hi <= 0.0) {
      throw ConfigError("analysis.compare incomes must be positive");
    }
    if (pair.group_size < 1) throw ConfigError("analysis.compare.group_size must be >= 1");
  }
  if (approach == Approach::Adaptive && grid_covariates.empty()) {
    throw ConfigError("approach.grid_covariates must name at least one covariate");
  }
}

namespace {

GroundTruthDynamics::Params make_params(std::initializer_list<double> alpha,
                                        std::initializer_list<double> beta) {
  GroundTruthDynamics::Params p;
  p.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.begin(),
                                              static_cast<Eigen::Index>(alpha.size()));
  p.beta = Eigen::Map<const Eigen::VectorXd>(beta.begin(),
                                             static_cast<Eigen::Index>(beta.size()));
  return p;
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig config;
  config.seed = 20250301;
  config.output_dir = "out";

  // Income law rescaled into the 10000..80000 comparison range so the
  // affordability term stays comparable to the health term.
  config.covariates.income_offset = 10000.0;
  config.covariates.income_multiplier = 10000.0;
  config.covariates.income_pareto_scale = 1.0;
  config.covariates.income_pareto_shape = 2.5;

  // Data-generating transition law over standardized covariates. Treatment
  // improves the next-stage distribution everywhere; its edge shrinks with
  // age and blood pressure at stages 1-2, while at stage 3 untreated
  // dynamics deteriorate with age faster than treated ones, so the
  // treatment edge grows with age there.
  config.dynamics.design = {{"age", 50.0, 3.0},
                            {"blood_pressure", 110.0, 3.0},
                            {"exposure", 0.0, 1.0},
                            {"hormone", 700.0, 20.0}};
  config.dynamics.num_stages = 3;
  config.dynamics.params[{1, 1}] = make_params({1.2, 3.0}, {-0.2, 0.0, -0.6, 0.1});
  config.dynamics.params[{1, 2}] = make_params({1.4, 3.2}, {-0.55, -1.2, -0.6, 0.1});
  config.dynamics.params[{2, 1}] = make_params({-1.4, 1.4}, {-0.2, 0.0, -0.6, 0.1});
  config.dynamics.params[{2, 2}] = make_params({-1.2, 1.6}, {-0.55, -1.2, -0.6, 0.1});
  config.dynamics.params[{3, 1}] = make_params({-3.0, -0.8}, {-2.6, 0.0, -0.6, 0.1});
  config.dynamics.params[{3, 2}] = make_params({-2.2, 0.1}, {0.0, -0.9, -0.6, 0.1});

  const std::vector<std::pair<int, int>> entries = {{4, 1}, {3, 2}, {2, 3}, {5, 3}};
  config.sensitivity.push_back({"age", entries, 100, 21, 3.0});
  config.sensitivity.push_back({"blood_pressure", entries, 100, 21, 3.0});
  config.compare.push_back({10000.0, 80000.0, 100});
  config.compare.push_back({40000.0, 45000.0, 100});

  config.grid_covariates = {"age", "exposure"};
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& error) {
    throw ConfigError("config parse error: " + std::string(error.what()));
  }
  return ExperimentConfig::from_json(doc);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' must look like path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw ConfigError("override path '" + path + "' has an empty key");
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string canonical = config.to_json().dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace dtr
