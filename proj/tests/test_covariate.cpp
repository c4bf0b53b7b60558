#include "dtr/covariate.hpp"

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "dtr/mdp.hpp"

namespace dtr {
namespace {

RewardParameters paper_params(double theta = 80000.0) {
  RewardParameters params;
  params.geographic_factor = 0.7;
  params.cost_by_action = {0.0, 0.0, 5000.0};
  params.decay_rate = 1.2;
  params.income = theta;
  params.horizon = 8;
  params.num_stages = 3;
  return params;
}

FittedOrdinalModel constant_model(int s, int a, std::vector<double> alpha,
                                  std::vector<double> beta) {
  FittedOrdinalModel model;
  model.num_categories = static_cast<int>(alpha.size()) + 1;
  model.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(),
                                                  static_cast<Eigen::Index>(alpha.size()));
  model.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                                 static_cast<Eigen::Index>(beta.size()));
  // Slopes act on z-scored (age, exposure).
  model.mean = Eigen::Vector2d(50.0, 0.0);
  model.sd = Eigen::Vector2d(3.0, 1.0);
  model.context = {0, s, a};
  return model;
}

/// Time-homogeneous model set over (age, exposure) with the given slopes.
TransitionModelSet model_set(const std::vector<double>& beta_remit,
                             const std::vector<double>& beta_treat,
                             std::vector<double> alpha_remit = {-0.4, 1.2},
                             std::vector<double> alpha_treat = {0.4, 2.0}) {
  TransitionModelSet set;
  set.design_columns = {"age", "exposure"};
  for (int s = 1; s <= 3; ++s) {
    set.insert(constant_model(s, 1, alpha_remit, beta_remit));
    set.insert(constant_model(s, 2, alpha_treat, beta_treat));
  }
  return set;
}

CovariateProfile profile(double age, double exposure, double income) {
  CovariateProfile p;
  p.age = age;
  p.blood_pressure = age + 60.0;
  p.exposure = exposure;
  p.hormone = 700.0;
  p.income = income;
  return p;
}

TEST(StageReward, NoTransitionNoCostIsZero) {
  const RewardParameters params = paper_params();
  for (int t = 1; t <= 7; ++t) {
    for (int i = 1; i <= 3; ++i) {
      EXPECT_DOUBLE_EQ(stage_reward(i, i, 1, t, params), 0.0);
    }
  }
}

TEST(StageReward, PaperSpotChecks) {
  const RewardParameters params = paper_params(80000.0);
  EXPECT_NEAR(stage_reward(2, 1, 2, 1, params), 0.1561754, 1e-6);
  EXPECT_NEAR(stage_reward(2, 1, 2, 1, params),
              0.7 * 1.0 / 4.0 - (5000.0 / 80000.0) * std::exp(-1.2), 1e-15);
  EXPECT_NEAR(stage_reward(1, 3, 1, 2, params), -0.1555556, 1e-6);
  EXPECT_NEAR(stage_reward(1, 3, 1, 2, params), 0.7 * (-2.0) / 9.0, 1e-15);
}

TEST(TerminalReward, PaperSpotChecks) {
  const RewardParameters params = paper_params();
  EXPECT_DOUBLE_EQ(terminal_reward(3, params), 0.0);
  EXPECT_NEAR(terminal_reward(1, params), 0.0172840, 1e-7);
  EXPECT_NEAR(terminal_reward(1, params), 0.7 * 2.0 / 81.0, 1e-15);
  EXPECT_NEAR(terminal_reward(2, params), 0.0086420, 1e-7);
}

TEST(RewardParametersChecks, ValidationRejectsPaidRemission) {
  RewardParameters params = paper_params();
  params.cost_by_action[1] = 1.0;
  EXPECT_THROW(params.validate(), std::invalid_argument);
}

TEST(CovariateProfileChecks, ValueLookupAndValidation) {
  CovariateProfile p = profile(52.0, 1.0, 30000.0);
  p.extra_names = {"cd34"};
  p.extra = {1.0};
  EXPECT_DOUBLE_EQ(p.value("age"), 52.0);
  EXPECT_DOUBLE_EQ(p.value("cd34"), 1.0);
  EXPECT_THROW(p.value("weight"), std::invalid_argument);

  CovariateProfile bad = profile(52.0, 0.5, 30000.0);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  CovariateProfile broke = profile(52.0, 0.0, -1.0);
  EXPECT_THROW(broke.validate(), std::invalid_argument);
}

TEST(Grid, TertilesAndCellMapping) {
  std::vector<CovariateProfile> training;
  for (int i = 0; i < 99; ++i) {
    training.push_back(profile(40.0 + i * 0.2, i % 10 == 0 ? 1.0 : 0.0, 20000.0));
  }
  const CovariateGrid grid = CovariateGrid::tertiles(training, {"age", "exposure"});
  EXPECT_EQ(grid.cell_count(), 6u);  // 3 age levels x 2 exposure levels

  for (const auto& p : training) {
    EXPECT_LT(grid.cell_of(p), grid.cell_count());
  }
  // Age below the first tertile, unexposed: first cell.
  EXPECT_EQ(grid.cell_of(profile(30.0, 0.0, 1.0)), 0u);
  EXPECT_EQ(grid.cell_of(profile(90.0, 1.0, 1.0)), grid.cell_count() - 1);
}

TEST(AugmentedSpace, BijectionRoundTrips) {
  const AugmentedStateSpace space(3, 14);
  EXPECT_EQ(space.size(), 42u);
  for (int label = 1; label <= static_cast<int>(space.size()); ++label) {
    const auto [stage, cell] = space.split(label);
    EXPECT_GE(stage, 1);
    EXPECT_LE(stage, 3);
    EXPECT_LT(cell, 14u);
    EXPECT_EQ(space.label(stage, cell), label);
  }
}

TEST(NonAdaptiveBuild, CovariatesInertWhenSlopesZero) {
  const TransitionModelSet set = model_set({0.0, 0.0}, {0.0, 0.0});
  const RewardParameters params = paper_params();
  const auto a = build_nonadaptive_mdp(set, profile(45.0, 0.0, 30000.0), params, 8);
  const auto b = build_nonadaptive_mdp(set, profile(61.0, 1.0, 30000.0), params, 8);
  const PolicySolution sa = backward_induction(a);
  const PolicySolution sb = backward_induction(b);
  EXPECT_EQ(sa.policy, sb.policy);
  EXPECT_EQ(sa.value, sb.value);
}

TEST(NonAdaptiveBuild, PaperConfigurationYields7x3Matrix) {
  const TransitionModelSet set = model_set({-0.3, -0.5}, {-0.6, -0.5});
  const auto mdp =
      build_nonadaptive_mdp(set, profile(50.0, 0.0, 20000.0), paper_params(), 8);
  const PolicySolution solution = backward_induction(mdp);
  ASSERT_EQ(solution.policy.d.size(), 7u);
  for (const auto& row : solution.policy.d) EXPECT_EQ(row.size(), 3u);
}

TEST(NonAdaptiveBuild, ThetaEntersRewardOnly) {
  const TransitionModelSet set = model_set({-0.3, -0.5}, {-0.6, -0.5});
  const RewardParameters params = paper_params();
  const auto base = build_nonadaptive_mdp(set, profile(50.0, 0.0, 20000.0), params, 8);
  const auto doubled = build_nonadaptive_mdp(set, profile(50.0, 0.0, 40000.0), params, 8);

  EXPECT_EQ(base.kernel().raw(), doubled.kernel().raw());
  for (int t = 1; t <= 7; ++t) {
    for (int s = 1; s <= 3; ++s) {
      for (int j = 1; j <= 3; ++j) {
        EXPECT_DOUBLE_EQ(base.stage_reward(t, s, 0, j), doubled.stage_reward(t, s, 0, j));
        const double gap = base.stage_reward(t, s, 1, j) - doubled.stage_reward(t, s, 1, j);
        const double expected =
            -(5000.0 / 20000.0 - 5000.0 / 40000.0) * std::exp(-1.2 * t);
        EXPECT_NEAR(gap, expected, 1e-12);
      }
    }
  }
  EXPECT_EQ(base.rewards().terminal, doubled.rewards().terminal);
}

TEST(NonAdaptiveBuild, MissingModelIsConfigError) {
  TransitionModelSet set = model_set({0.0, 0.0}, {0.0, 0.0});
  set.models.erase({0, 2, 1});
  EXPECT_THROW(
      build_nonadaptive_mdp(set, profile(50.0, 0.0, 20000.0), paper_params(), 8),
      ConfigError);
}

TEST(AdaptiveBuild, BinaryCovariateGivesSixAugmentedStates) {
  const AugmentedStateSpace space(3, 2);
  EXPECT_EQ(space.size(), 6u);
}

TEST(AdaptiveBuild, RelativeFrequenciesAndSmoothing) {
  const AugmentedStateSpace space(3, 2);
  const ActionSet stage_actions({{1, 2}, {1, 2}, {1, 2}});
  TransitionCounts counts;
  counts.counts.assign(6, std::vector<std::vector<double>>(2, std::vector<double>(6, 0.0)));
  counts.counts[0][0] = {2.0, 1.0, 1.0, 0.0, 0.0, 0.0};
  // Every other row left all-zero: smoothing turns them uniform.
  const auto mdp =
      build_adaptive_mdp(counts, space, stage_actions, paper_params(), 4, true);
  const auto row = mdp.kernel().row(1, 1, 0);
  EXPECT_DOUBLE_EQ(row[0], 0.5);
  EXPECT_DOUBLE_EQ(row[1], 0.25);
  EXPECT_DOUBLE_EQ(row[2], 0.25);
  EXPECT_DOUBLE_EQ(row[3], 0.0);
  const auto smoothed = mdp.kernel().row(1, 2, 0);
  for (double p : smoothed) EXPECT_DOUBLE_EQ(p, 1.0 / 6.0);

  EXPECT_THROW(build_adaptive_mdp(counts, space, stage_actions, paper_params(), 4, false),
               UnestimableRowError);
}

TEST(AdaptiveBuild, RewardInvariantOverCells) {
  const AugmentedStateSpace space(3, 4);
  const ActionSet stage_actions({{1, 2}, {1, 2}, {1, 2}});
  TransitionCounts counts;
  counts.counts.assign(
      space.size(),
      std::vector<std::vector<double>>(2, std::vector<double>(space.size(), 1.0)));
  const RewardParameters params = paper_params(25000.0);
  const auto mdp = build_adaptive_mdp(counts, space, stage_actions, params, 8);

  for (int t = 1; t <= 7; ++t) {
    for (std::size_t i = 0; i < space.size(); ++i) {
      const int stage_i = space.split(static_cast<int>(i) + 1).first;
      for (int k = 0; k < 2; ++k) {
        for (std::size_t j = 0; j < space.size(); ++j) {
          const int stage_j = space.split(static_cast<int>(j) + 1).first;
          EXPECT_DOUBLE_EQ(
              mdp.stage_reward(t, static_cast<int>(i) + 1, k, static_cast<int>(j) + 1),
              stage_reward(stage_i, stage_j, k + 1, t, params));
        }
      }
    }
  }
  for (std::size_t j = 0; j < space.size(); ++j) {
    const int stage_j = space.split(static_cast<int>(j) + 1).first;
    EXPECT_DOUBLE_EQ(mdp.terminal_reward(static_cast<int>(j) + 1),
                     terminal_reward(stage_j, params));
  }
}

TEST(AdaptiveBuild, SingleCellReducesToPlainMdp) {
  // |Omega| = 1: the adaptive build must match a plain 3-state MDP carrying
  // the same kernel rows and rewards.
  const AugmentedStateSpace space(3, 1);
  const ActionSet stage_actions({{1, 2}, {1, 2}, {1, 2}});
  TransitionCounts counts;
  counts.counts = {
      {{6.0, 3.0, 1.0}, {8.0, 1.5, 0.5}},
      {{2.0, 6.0, 2.0}, {5.0, 4.0, 1.0}},
      {{1.0, 3.0, 6.0}, {2.0, 5.0, 3.0}},
  };
  const RewardParameters params = paper_params(15000.0);
  const int horizon = 6;
  const auto adaptive = build_adaptive_mdp(counts, space, stage_actions, params, horizon);

  std::vector<std::vector<std::vector<double>>> frequency(3);
  for (int s = 0; s < 3; ++s) {
    for (const auto& row : counts.counts[s]) {
      double total = 0.0;
      for (double c : row) total += c;
      std::vector<double> normalized = row;
      for (double& c : normalized) c /= total;
      frequency[s].push_back(normalized);
    }
  }
  std::vector<std::vector<std::vector<std::vector<double>>>> kernel(horizon - 1,
                                                                    frequency);
  std::vector<std::vector<std::vector<std::vector<double>>>> stage(horizon - 1);
  std::vector<double> terminal(3);
  for (int t = 1; t <= horizon - 1; ++t) {
    stage[t - 1].resize(3);
    for (int s = 1; s <= 3; ++s) {
      for (int a = 1; a <= 2; ++a) {
        std::vector<double> rewards(3);
        for (int j = 1; j <= 3; ++j) rewards[j - 1] = stage_reward(s, j, a, t, params);
        stage[t - 1][s - 1].push_back(std::move(rewards));
      }
    }
  }
  for (int j = 1; j <= 3; ++j) terminal[j - 1] = terminal_reward(j, params);
  StateSpace states{3};
  TransitionKernel k(std::move(kernel), states, stage_actions);
  const FiniteHorizonMDP plain(states, stage_actions, horizon, std::move(k),
                               RewardSpec{std::move(stage), std::move(terminal)});

  const PolicySolution sa = backward_induction(adaptive);
  const PolicySolution sp = backward_induction(plain);
  EXPECT_EQ(sa.policy, sp.policy);
  for (int t = 1; t <= horizon; ++t) {
    for (int s = 1; s <= 3; ++s) {
      EXPECT_NEAR(sa.value_at(t, s), sp.value_at(t, s), 1e-12);
    }
  }
}

TEST(ActionMatrix, CostMonotonicity) {
  // Raising C_2 never enlarges the treatment-optimal set and never raises
  // any value.
  const TransitionModelSet set =
      model_set({-0.4, -0.6}, {-0.7, -0.6}, {-0.8, 0.6}, {0.2, 1.8});
  const CovariateProfile p = profile(50.0, 0.0, 20000.0);
  const std::vector<double> costs = {0.0, 500.0, 2000.0, 5000.0, 20000.0, 1e12};
  std::vector<std::set<std::pair<int, int>>> treat_sets;
  std::vector<std::vector<std::vector<double>>> values;
  for (double c : costs) {
    RewardParameters params = paper_params();
    params.cost_by_action[2] = c;
    const auto mdp = build_nonadaptive_mdp(set, p, params, 8);
    const PolicySolution solution = action_matrix(mdp);
    std::set<std::pair<int, int>> treat;
    for (int t = 1; t <= 7; ++t) {
      for (int s = 1; s <= 3; ++s) {
        if (solution.policy.action(t, s) == 2) treat.insert({t, s});
      }
    }
    treat_sets.push_back(std::move(treat));
    values.push_back(solution.value);
  }
  for (std::size_t i = 1; i < costs.size(); ++i) {
    for (const auto& entry : treat_sets[i]) {
      EXPECT_TRUE(treat_sets[i - 1].count(entry))
          << "treatment set grew when C2 rose at (" << entry.first << ","
          << entry.second << ")";
    }
    for (std::size_t t = 0; t < values[i].size(); ++t) {
      for (std::size_t s = 0; s < values[i][t].size(); ++s) {
        EXPECT_LE(values[i][t][s], values[i - 1][t][s] + 1e-12);
      }
    }
  }
  // Unaffordable treatment is never prescribed.
  EXPECT_TRUE(treat_sets.back().empty());
}

TEST(ActionMatrix, FreeEffectiveTreatmentIsChosenEverywhere) {
  // C_2 = 0 with a treatment kernel that stochastically dominates remission
  // toward lower stages: treatment optimal at every entry; checked against
  // the enumeration oracle.
  const TransitionModelSet set =
      model_set({-0.5, 0.0}, {-0.5, 0.0}, {-0.8, 0.6}, {0.4, 1.9});
  RewardParameters params = paper_params();
  params.cost_by_action[2] = 0.0;
  const auto mdp = build_nonadaptive_mdp(set, profile(50.0, 0.0, 20000.0), params, 5);
  const PolicySolution solution = action_matrix(mdp);
  for (const auto& row : solution.policy.d) {
    for (int action : row) EXPECT_EQ(action, 2);
  }
  const EnumerationResult oracle = enumerate_optimal(mdp);
  for (int s = 1; s <= 3; ++s) {
    EXPECT_NEAR(oracle.value[s - 1], solution.value_at(1, s), 1e-9);
  }
}

TEST(Grid, CellOccupancySumsToOne) {
  std::vector<CovariateProfile> cohort;
  for (int i = 0; i < 60; ++i) {
    cohort.push_back(profile(44.0 + i * 0.2, i % 5 == 0 ? 1.0 : 0.0, 20000.0));
  }
  const CovariateGrid grid = CovariateGrid::tertiles(cohort, {"age", "exposure"});
  const auto occupancy = cell_occupancy(cohort, grid);
  ASSERT_EQ(occupancy.size(), grid.cell_count());
  double total = 0.0;
  for (double p : occupancy) {
    EXPECT_GE(p, 0.0);
    total += p;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(StageProjection, RecoversPerCellActions) {
  const AugmentedStateSpace space(2, 3);
  PolicySolution solution;
  solution.policy.d = {{1, 2, 1, 2, 2, 1}};
  const auto projection = stage_projection(solution, space);
  ASSERT_EQ(projection.size(), 1u);
  for (int stage = 1; stage <= 2; ++stage) {
    for (std::size_t cell = 0; cell < 3; ++cell) {
      EXPECT_EQ(projection[0][stage - 1][cell],
                solution.policy.d[0][space.label(stage, cell) - 1]);
    }
  }
}

}  // namespace
}  // namespace dtr
