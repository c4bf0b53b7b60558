#include "dtr/covariate.hpp"

#include <algorithm>
#include <cmath>

namespace dtr {

double CovariateProfile::value(std::string_view name) const {
  if (name == "age") return age;
  if (name == "blood_pressure") return blood_pressure;
  if (name == "exposure") return exposure;
  if (name == "hormone") return hormone;
  if (name == "income") return income;
  for (std::size_t i = 0; i < extra_names.size(); ++i) {
    if (extra_names[i] == name) return extra.at(i);
  }
  throw std::invalid_argument("unknown covariate '" + std::string(name) + "'");
}

void CovariateProfile::validate() const {
  for (double v : {age, blood_pressure, exposure, hormone, income}) {
    if (!std::isfinite(v)) throw std::invalid_argument("covariate value not finite");
  }
  if (exposure != 0.0 && exposure != 1.0) {
    throw std::invalid_argument("exposure indicator must be 0 or 1");
  }
  if (income <= 0.0) throw std::invalid_argument("income must be positive");
  if (extra.size() != extra_names.size()) {
    throw std::invalid_argument("extra covariates and names differ in length");
  }
}

std::size_t GridDimension::level_of(double value) const {
  std::size_t level = 0;
  while (level < breaks.size() && value > breaks[level]) ++level;
  return level;
}

CovariateGrid::CovariateGrid(std::vector<GridDimension> dims) : dims_(std::move(dims)) {
  for (const auto& dim : dims_) {
    if (!std::is_sorted(dim.breaks.begin(), dim.breaks.end())) {
      throw std::invalid_argument("grid breaks for '" + dim.covariate +
                                  "' must be sorted");
    }
  }
}

std::size_t CovariateGrid::cell_count() const {
  std::size_t count = 1;
  for (const auto& dim : dims_) count *= dim.levels();
  return count;
}

std::size_t CovariateGrid::cell_of(const CovariateProfile& profile) const {
  std::size_t index = 0;
  for (const auto& dim : dims_) {
    index = index * dim.levels() + dim.level_of(profile.value(dim.covariate));
  }
  return index;
}

CovariateGrid CovariateGrid::tertiles(const std::vector<CovariateProfile>& training,
                                      const std::vector<std::string>& covariates) {
  std::vector<GridDimension> dims;
  for (const auto& name : covariates) {
    std::vector<double> values;
    values.reserve(training.size());
    for (const auto& profile : training) values.push_back(profile.value(name));
    std::sort(values.begin(), values.end());
    const bool binary = std::all_of(values.begin(), values.end(), [](double v) {
      return v == 0.0 || v == 1.0;
    });
    if (binary) {
      dims.push_back({name, {0.5}});
      continue;
    }
    const auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(values.size() - 1);
      const auto lo = static_cast<std::size_t>(pos);
      const std::size_t hi = std::min(lo + 1, values.size() - 1);
      const double w = pos - static_cast<double>(lo);
      return (1.0 - w) * values[lo] + w * values[hi];
    };
    dims.push_back({name, {quantile(1.0 / 3.0), quantile(2.0 / 3.0)}});
  }
  return CovariateGrid(std::move(dims));
}

void RewardParameters::validate() const {
  if (geographic_factor <= 0.0) throw std::invalid_argument("g must be positive");
  if (decay_rate < 0.0) throw std::invalid_argument("lambda must be non-negative");
  if (income <= 0.0) throw std::invalid_argument("theta must be positive");
  if (horizon < 2) throw std::invalid_argument("N must be >= 2");
  if (num_stages < 1) throw std::invalid_argument("J must be >= 1");
  if (cost_by_action.size() < 2) {
    throw std::invalid_argument("need a cost for every action id");
  }
  if (cost_by_action[1] != 0.0) {
    throw std::invalid_argument("remission (action 1) must be cost-free");
  }
  for (double c : cost_by_action) {
    if (!std::isfinite(c) || c < 0.0) {
      throw std::invalid_argument("action costs must be finite and non-negative");
    }
  }
}

double stage_reward(int i, int j, int action, int t, const RewardParameters& params) {
  const double gain = params.geographic_factor * static_cast<double>(i - j) /
                      ((t + 1.0) * (t + 1.0));
  const double cost = params.cost(action) / params.income *
                      std::exp(-params.decay_rate * static_cast<double>(t));
  return gain - cost;
}

double terminal_reward(int j, const RewardParameters& params) {
  const double n1 = params.horizon + 1.0;
  return params.geographic_factor * static_cast<double>(params.num_stages - j) /
         (n1 * n1);
}

const FittedOrdinalModel& TransitionModelSet::model_for(int t, int s, int a) const {
  if (per_epoch) {
    const auto it = models.find({t, s, a});
    if (it != models.end()) return it->second;
  }
  const auto it = models.find({0, s, a});
  if (it == models.end()) {
    throw ConfigError("no fitted model for state " + std::to_string(s) + ", action " +
                      std::to_string(a) +
                      (per_epoch ? ", epoch " + std::to_string(t) : std::string{}));
  }
  return it->second;
}

void TransitionModelSet::insert(FittedOrdinalModel model) {
  const auto key = std::make_tuple(model.context.epoch, model.context.state,
                                   model.context.action);
  models[key] = std::move(model);
}

Eigen::VectorXd design_vector(const CovariateProfile& profile,
                              const std::vector<std::string>& columns) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    x[static_cast<Eigen::Index>(k)] = profile.value(columns[k]);
  }
  return x;
}

FiniteHorizonMDP build_nonadaptive_mdp(const TransitionModelSet& models,
                                       const CovariateProfile& profile,
                                       const RewardParameters& params, int horizon) {
  profile.validate();
  const int num_stages = params.num_stages;
  RewardParameters patient = params;
  patient.income = profile.income;
  patient.horizon = horizon;
  patient.validate();

  std::vector<std::vector<int>> per_state(num_stages);
  for (auto& actions : per_state) {
    for (std::size_t a = 1; a < params.cost_by_action.size(); ++a) {
      actions.push_back(static_cast<int>(a));
    }
  }
  ActionSet actions(per_state);

  const Eigen::VectorXd x = design_vector(profile, models.design_columns);

  std::vector<std::vector<std::vector<std::vector<double>>>> kernel_rows(horizon - 1);
  std::vector<std::vector<std::vector<std::vector<double>>>> stage_rows(horizon - 1);
  for (int t = 1; t <= horizon - 1; ++t) {
    kernel_rows[t - 1].resize(num_stages);
    stage_rows[t - 1].resize(num_stages);
    for (int s = 1; s <= num_stages; ++s) {
      const auto& admissible = actions.for_state(s);
      for (int a : admissible) {
        kernel_rows[t - 1][s - 1].push_back(
            predict_row(models.model_for(t, s, a), x));
        std::vector<double> rewards(num_stages);
        for (int j = 1; j <= num_stages; ++j) {
          rewards[j - 1] = stage_reward(s, j, a, t, patient);
        }
        stage_rows[t - 1][s - 1].push_back(std::move(rewards));
      }
    }
  }

  std::vector<double> terminal(num_stages);
  for (int j = 1; j <= num_stages; ++j) terminal[j - 1] = terminal_reward(j, patient);

  StateSpace states{num_stages};
  TransitionKernel kernel(std::move(kernel_rows), states, actions);
  return FiniteHorizonMDP(states, std::move(actions), horizon, std::move(kernel),
                          RewardSpec{std::move(stage_rows), std::move(terminal)});
}

FiniteHorizonMDP build_adaptive_mdp(const TransitionCounts& counts,
                                    const AugmentedStateSpace& space,
                                    const ActionSet& stage_actions,
                                    const RewardParameters& params, int horizon,
                                    bool add_one_smoothing) {
  const auto size = space.size();
  if (counts.counts.size() != size) {
    throw std::invalid_argument("transition counts do not match the augmented space");
  }

  std::vector<std::vector<int>> per_state(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto [stage, cell] = space.split(static_cast<int>(i) + 1);
    (void)cell;
    per_state[i] = stage_actions.for_state(stage);
  }
  ActionSet actions(per_state);

  std::vector<std::vector<std::vector<double>>> frequency(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto& per_action = counts.counts[i];
    if (per_action.size() != per_state[i].size()) {
      throw std::invalid_argument("transition counts missing an action row");
    }
    frequency[i].resize(per_action.size());
    for (std::size_t k = 0; k < per_action.size(); ++k) {
      std::vector<double> row = per_action[k];
      if (row.size() != size) {
        throw std::invalid_argument("transition count row has wrong length");
      }
      double total = 0.0;
      for (double c : row) {
        if (c < 0.0) throw std::invalid_argument("negative transition count");
        total += c;
      }
      if (total == 0.0) {
        if (!add_one_smoothing) {
          const auto [stage, cell] = space.split(static_cast<int>(i) + 1);
          throw UnestimableRowError("no transitions observed from stage " +
                                    std::to_string(stage) + ", cell " +
                                    std::to_string(cell) + ", action " +
                                    std::to_string(per_state[i][k]));
        }
        row.assign(size, 1.0);
        total = static_cast<double>(size);
      }
      for (double& c : row) c /= total;
      frequency[i][k] = std::move(row);
    }
  }

  const int epochs = horizon - 1;
  std::vector<std::vector<std::vector<std::vector<double>>>> kernel_rows(
      epochs, frequency);

  std::vector<std::vector<std::vector<std::vector<double>>>> stage_rows(epochs);
  std::vector<double> terminal(size);
  for (int t = 1; t <= epochs; ++t) {
    stage_rows[t - 1].resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      const int stage_i = space.split(static_cast<int>(i) + 1).first;
      for (int a : per_state[i]) {
        std::vector<double> rewards(size);
        for (std::size_t j = 0; j < size; ++j) {
          const int stage_j = space.split(static_cast<int>(j) + 1).first;
          rewards[j] = stage_reward(stage_i, stage_j, a, t, params);
        }
        stage_rows[t - 1][i].push_back(std::move(rewards));
      }
    }
  }
  for (std::size_t j = 0; j < size; ++j) {
    terminal[j] = terminal_reward(space.split(static_cast<int>(j) + 1).first, params);
  }

  StateSpace states{static_cast<int>(size)};
  TransitionKernel kernel(std::move(kernel_rows), states, actions);
  return FiniteHorizonMDP(states, std::move(actions), horizon, std::move(kernel),
                          RewardSpec{std::move(stage_rows), std::move(terminal)});
}

PolicySolution action_matrix(const FiniteHorizonMDP& mdp) {
  return backward_induction(mdp);
}

std::vector<double> cell_occupancy(const std::vector<CovariateProfile>& cohort,
                                   const CovariateGrid& grid) {
  std::vector<double> occupancy(grid.cell_count(), 0.0);
  for (const auto& profile : cohort) occupancy[grid.cell_of(profile)] += 1.0;
  for (double& p : occupancy) p /= static_cast<double>(cohort.size());
  return occupancy;
}

std::vector<std::vector<std::vector<int>>> stage_projection(
    const PolicySolution& solution, const AugmentedStateSpace& space) {
  const auto epochs = solution.policy.d.size();
  std::vector<std::vector<std::vector<int>>> out(
      epochs, std::vector<std::vector<int>>(space.num_stages(),
                                            std::vector<int>(space.num_cells(), 0)));
  for (std::size_t t = 0; t < epochs; ++t) {
    for (std::size_t i = 0; i < solution.policy.d[t].size(); ++i) {
      const auto [stage, cell] = space.split(static_cast<int>(i) + 1);
      out[t][stage - 1][cell] = solution.policy.d[t][i];
    }
  }
  return out;
}

}  // namespace dtr
