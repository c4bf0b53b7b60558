#include "dtr/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace dtr {

TransitionModelSet fit_transition_models(const TrajectoryDataset& dataset,
                                         const ActionSet& actions,
                                         const std::vector<std::string>& columns,
                                         const FitConfig& config, bool per_epoch,
                                         ExecMode mode) {
  std::vector<TransitionContext> contexts;
  for (int s = 1; s <= dataset.num_stages; ++s) {
    for (int a : actions.for_state(s)) {
      if (per_epoch) {
        for (int t = 1; t <= dataset.horizon - 1; ++t) contexts.push_back({t, s, a});
      } else {
        contexts.push_back({0, s, a});
      }
    }
  }

  std::vector<FittedOrdinalModel> fitted(contexts.size());
  std::vector<std::exception_ptr> failures(contexts.size());
  parallel_for(contexts.size(), mode, [&](std::size_t i) {
    try {
      const auto& ctx = contexts[i];
      OrdinalDataset data =
          to_ordinal_dataset(dataset, ctx.state, ctx.action, columns, ctx.epoch);
      fitted[i] = fit(data, config);
      fitted[i].columns = columns;
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  TransitionModelSet set;
  set.per_epoch = per_epoch;
  set.design_columns = columns;
  for (auto& model : fitted) set.insert(std::move(model));
  return set;
}

std::vector<PolicySolution> solve_cohort(const std::vector<CovariateProfile>& cohort,
                                         const TransitionModelSet& models,
                                         const RewardParameters& params, int horizon,
                                         ExecMode mode) {
  std::vector<PolicySolution> solutions(cohort.size());
  std::vector<std::exception_ptr> failures(cohort.size());
  parallel_for(cohort.size(), mode, [&](std::size_t i) {
    try {
      const FiniteHorizonMDP mdp = build_nonadaptive_mdp(models, cohort[i], params, horizon);
      solutions[i] = backward_induction(mdp);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return solutions;
}

std::vector<double> default_sensitivity_grid(const std::string& covariate,
                                             const CovariateSpec& spec, int points,
                                             double span_sd) {
  if (covariate == "exposure") return {0.0, 1.0};
  for (const auto& column : spec.extra) {
    if (column.name == covariate) return {0.0, 1.0};
  }
  double center;
  double sd;
  if (covariate == "age") {
    center = spec.age_mean;
    sd = spec.age_sd;
  } else if (covariate == "blood_pressure") {
    center = spec.age_mean + spec.bp_offset;
    // Marginal spread: age variation plus the conditional noise.
    sd = std::sqrt(spec.age_sd * spec.age_sd + spec.bp_sd * spec.bp_sd);
  } else if (covariate == "hormone") {
    center = spec.hormone_mean;
    sd = spec.hormone_sd;
  } else {
    throw std::invalid_argument("no default grid for covariate '" + covariate + "'");
  }
  std::vector<double> grid(points);
  for (int g = 0; g < points; ++g) {
    grid[g] = center + sd * (-span_sd + 2.0 * span_sd * g / (points - 1.0));
  }
  return grid;
}

std::vector<SensitivityCurve> sensitivity_curves(const SensitivityRequest& request,
                                                 const TransitionModelSet& models,
                                                 const CovariateSpec& spec,
                                                 const RewardParameters& params,
                                                 int horizon, std::uint64_t seed,
                                                 ExecMode mode) {
  if (request.reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (request.grid.empty()) throw std::invalid_argument("empty sensitivity grid");
  for (const auto& [t, stage] : request.entries) {
    if (t < 1 || t > horizon - 1 || stage < 1 || stage > params.num_stages) {
      throw std::invalid_argument("action-matrix entry (" + std::to_string(t) + ", " +
                                  std::to_string(stage) + ") out of range");
    }
  }

  const std::size_t num_points = request.grid.size();
  const auto reps = static_cast<std::size_t>(request.reps);
  // treated[(g * reps + r) * entries + e] = 1 when the solved matrix
  // prescribes treatment at entry e.
  std::vector<unsigned char> treated(num_points * reps * request.entries.size(), 0);

  parallel_for(num_points * reps, mode, [&](std::size_t work) {
    const std::size_t g = work / reps;
    const std::size_t r = work % reps;
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(StreamTag::Sensitivity), g, r));
    const CovariatePins pins{{request.covariate, request.grid[g]}};
    const CovariateProfile profile = sample_profile(spec, rng, &pins);
    const FiniteHorizonMDP mdp = build_nonadaptive_mdp(models, profile, params, horizon);
    const PolicySolution solution = backward_induction(mdp);
    for (std::size_t e = 0; e < request.entries.size(); ++e) {
      const auto [t, stage] = request.entries[e];
      treated[work * request.entries.size() + e] =
          solution.policy.action(t, stage) == request.treatment_action ? 1 : 0;
    }
  });

  std::vector<SensitivityCurve> curves(request.entries.size());
  for (std::size_t e = 0; e < request.entries.size(); ++e) {
    auto& curve = curves[e];
    curve.covariate = request.covariate;
    curve.entry_t = request.entries[e].first;
    curve.entry_stage = request.entries[e].second;
    curve.grid = request.grid;
    curve.reps = request.reps;
    curve.proportion.resize(num_points);
    curve.lower.resize(num_points);
    curve.upper.resize(num_points);
    for (std::size_t g = 0; g < num_points; ++g) {
      std::size_t count = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        count += treated[(g * reps + r) * request.entries.size() + e];
      }
      curve.proportion[g] = static_cast<double>(count) / static_cast<double>(reps);
      const Interval band = confidence_band(curve.proportion[g], request.reps);
      curve.lower[g] = band.lo;
      curve.upper[g] = band.hi;
    }
  }
  return curves;
}

SensitivityCurve sensitivity_curve(const std::string& covariate,
                                   const std::vector<double>& grid, int entry_t,
                                   int entry_stage, int reps,
                                   const TransitionModelSet& models,
                                   const CovariateSpec& spec,
                                   const RewardParameters& params, int horizon,
                                   std::uint64_t seed, ExecMode mode) {
  SensitivityRequest request;
  request.covariate = covariate;
  request.grid = grid;
  request.entries = {{entry_t, entry_stage}};
  request.reps = reps;
  return sensitivity_curves(request, models, spec, params, horizon, seed, mode).front();
}

IncomeComparisonTable income_comparison(double theta_lo, double theta_hi,
                                        std::size_t group_size,
                                        const TransitionModelSet& models,
                                        const CovariateSpec& spec,
                                        const RewardParameters& params, int horizon,
                                        std::uint64_t seed, ExecMode mode,
                                        int treatment_action) {
  if (group_size < 1) throw std::invalid_argument("group size must be >= 1");
  if (theta_lo <= 0.0 || theta_hi <= 0.0) {
    throw std::invalid_argument("income levels must be positive");
  }
  const std::uint64_t cohort_seed =
      substream_seed(seed, static_cast<std::uint64_t>(StreamTag::Comparison));

  IncomeComparisonTable table;
  table.theta_lo = theta_lo;
  table.theta_hi = theta_hi;
  table.group_size = static_cast<int>(group_size);
  table.treatment_action = treatment_action;

  const auto proportions = [&](double theta) {
    const auto cohort = fixed_income_cohort(spec, theta, group_size, cohort_seed);
    const auto solutions = solve_cohort(cohort, models, params, horizon, mode);
    std::vector<std::vector<double>> out(horizon - 1,
                                         std::vector<double>(params.num_stages, 0.0));
    for (const auto& solution : solutions) {
      for (int t = 1; t <= horizon - 1; ++t) {
        for (int s = 1; s <= params.num_stages; ++s) {
          if (solution.policy.action(t, s) == treatment_action) out[t - 1][s - 1] += 1.0;
        }
      }
    }
    for (auto& row : out) {
      for (double& cell : row) cell /= static_cast<double>(group_size);
    }
    return out;
  };

  table.lo = proportions(theta_lo);
  table.hi = proportions(theta_hi);
  return table;
}

std::vector<StageDominance> dominance_summary(const IncomeComparisonTable& table) {
  const std::size_t epochs = table.lo.size();
  const std::size_t stages = epochs == 0 ? 0 : table.lo.front().size();
  std::vector<StageDominance> out(stages);
  for (std::size_t s = 0; s < stages; ++s) {
    auto& verdict = out[s];
    verdict.stage = static_cast<int>(s) + 1;
    verdict.hi_weakly_dominates = true;
    verdict.all_ties = true;
    bool prev_hi_at_least = true;
    for (std::size_t t = 0; t < epochs; ++t) {
      const double lo = table.lo[t][s];
      const double hi = table.hi[t][s];
      if (hi != lo) verdict.all_ties = false;
      if (hi < lo) verdict.hi_weakly_dominates = false;
      const bool hi_at_least = hi >= lo;
      if (t > 0 && hi_at_least != prev_hi_at_least) {
        verdict.crossover_epochs.push_back(static_cast<int>(t) + 1);
      }
      prev_hi_at_least = hi_at_least;
    }
  }
  return out;
}

}  // namespace dtr
