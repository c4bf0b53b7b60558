#include "dtr/cohort.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "dtr/config.hpp"
#include "dtr/stats.hpp"

namespace dtr {
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

/// Truth whose kernels ignore the covariates and stay uniform over stages.
GroundTruthDynamics uniform_truth() {
  GroundTruthDynamics truth;
  truth.num_stages = 3;
  truth.design = {{"age", 50.0, 3.0}};
  const auto uniform = make_params({logit(1.0 / 3.0), logit(2.0 / 3.0)}, {0.0});
  for (int s = 1; s <= 3; ++s) {
    for (int a = 1; a <= 2; ++a) truth.params[{s, a}] = uniform;
  }
  return truth;
}

/// Truth that keeps every patient in the initial stage (saturated cut-points).
GroundTruthDynamics identity_truth() {
  GroundTruthDynamics truth;
  truth.num_stages = 3;
  truth.design = {{"age", 50.0, 3.0}};
  for (int a = 1; a <= 2; ++a) {
    truth.params[{1, a}] = make_params({40.0, 80.0}, {0.0});
    truth.params[{2, a}] = make_params({-40.0, 40.0}, {0.0});
    truth.params[{3, a}] = make_params({-80.0, -40.0}, {0.0});
  }
  return truth;
}

const ActionSet kActions({{1, 2}, {1, 2}, {1, 2}});

TEST(SampleCohort, PaperTrainingSizeAndMoments) {
  const CovariateSpec spec;
  const auto cohort = sample_cohort(spec, 500, 424242);
  ASSERT_EQ(cohort.size(), 500u);

  std::vector<double> ages;
  std::vector<double> bp_minus_age;
  for (const auto& p : cohort) {
    ages.push_back(p.age);
    bp_minus_age.push_back(p.blood_pressure - p.age);
  }
  EXPECT_NEAR(mean(ages), 50.0, 3.0 * 3.0 / std::sqrt(500.0));
  EXPECT_NEAR(mean(bp_minus_age), 60.0, 3.0 * 0.7 / std::sqrt(500.0));
}

TEST(SampleCohort, DeterministicGivenSeed) {
  const CovariateSpec spec;
  const auto a = sample_cohort(spec, 50, 7);
  const auto b = sample_cohort(spec, 50, 7);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].age, b[i].age);
    EXPECT_EQ(a[i].blood_pressure, b[i].blood_pressure);
    EXPECT_EQ(a[i].exposure, b[i].exposure);
    EXPECT_EQ(a[i].hormone, b[i].hormone);
    EXPECT_EQ(a[i].income, b[i].income);
  }
  const auto c = sample_cohort(spec, 50, 8);
  EXPECT_NE(a[0].age, c[0].age);
}

TEST(SampleCohort, DistributionalSanityAtTenThousand) {
  const CovariateSpec spec;
  const std::size_t n = 10000;
  const auto cohort = sample_cohort(spec, n, 99);
  std::vector<double> age, bp, exposure, hormone, income;
  for (const auto& p : cohort) {
    age.push_back(p.age);
    bp.push_back(p.blood_pressure);
    exposure.push_back(p.exposure);
    hormone.push_back(p.hormone);
    income.push_back(p.income);
    EXPECT_GT(p.income, 10000.0);
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(mean(age), 50.0, 4.0 * 3.0 / root_n);
  EXPECT_NEAR(sample_sd(age), 3.0, 4.0 * 3.0 / std::sqrt(2.0 * n));
  EXPECT_NEAR(mean(bp), 110.0, 4.0 * 3.1 / root_n);
  EXPECT_NEAR(sample_sd(bp), std::sqrt(9.0 + 0.49), 4.0 * 3.1 / std::sqrt(2.0 * n));
  EXPECT_NEAR(mean(exposure), 0.1, 4.0 * std::sqrt(0.1 * 0.9) / root_n);
  EXPECT_NEAR(mean(hormone), 700.0, 4.0 * 20.0 / root_n);
  // Income: offset + multiplier * Pareto(100, 10); mean 1e4 + 1e6 * 1000 / 9.
  const double pareto_sd = std::sqrt(10.0 * 1e4 / (81.0 * 8.0));
  EXPECT_NEAR(mean(income), 1e4 + 1e6 * 1000.0 / 9.0, 4.0 * 1e6 * pareto_sd / root_n);
}

TEST(FixedIncomeCohort, PinsIncomeAndSharesOtherDraws) {
  const CovariateSpec spec;
  const auto low = fixed_income_cohort(spec, 10000.0, 100, 31);
  const auto high = fixed_income_cohort(spec, 80000.0, 100, 31);
  const auto free = sample_cohort(spec, 100, 31);
  for (std::size_t i = 0; i < low.size(); ++i) {
    EXPECT_EQ(low[i].income, 10000.0);
    EXPECT_EQ(high[i].income, 80000.0);
    EXPECT_EQ(low[i].age, high[i].age);
    EXPECT_EQ(low[i].blood_pressure, high[i].blood_pressure);
    EXPECT_EQ(low[i].exposure, high[i].exposure);
    EXPECT_EQ(low[i].hormone, high[i].hormone);
    // Common random numbers extend to the unpinned cohort.
    EXPECT_EQ(low[i].age, free[i].age);
  }
}

TEST(SimulateTrajectories, IdentityKernelsFreezeState) {
  const auto cohort = sample_cohort(CovariateSpec{}, 40, 5);
  const auto dataset = simulate_trajectories(identity_truth(), cohort, kActions, 8, 5);
  ASSERT_EQ(dataset.records.size(), 40u * 7u);
  for (const auto& record : dataset.records) {
    EXPECT_EQ(record.next_state, record.state);
  }
}

TEST(SimulateTrajectories, UniformKernelFrequenciesWithinMultinomialBands) {
  const auto cohort = sample_cohort(CovariateSpec{}, 900, 17);
  const auto dataset = simulate_trajectories(uniform_truth(), cohort, kActions, 8, 17);
  std::vector<double> counts(3, 0.0);
  for (const auto& record : dataset.records) {
    ASSERT_GE(record.next_state, 1);
    ASSERT_LE(record.next_state, 3);
    counts[record.next_state - 1] += 1.0;
  }
  const double n = static_cast<double>(dataset.records.size());
  for (double c : counts) {
    EXPECT_NEAR(c / n, 1.0 / 3.0, 3.0 * std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n));
  }
}

TEST(SimulateTrajectories, AdmissibleAndDeterministicAcrossModes) {
  const auto cohort = sample_cohort(CovariateSpec{}, 64, 23);
  const GroundTruthDynamics truth = default_config().dynamics;
  SimulationOptions serial;
  serial.mode = ExecMode::Serial;
  SimulationOptions parallel;
  parallel.mode = ExecMode::Parallel;
  const auto a = simulate_trajectories(truth, cohort, kActions, 8, 23, serial);
  const auto b = simulate_trajectories(truth, cohort, kActions, 8, 23, parallel);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].patient_id, b.records[i].patient_id);
    EXPECT_EQ(a.records[i].t, b.records[i].t);
    EXPECT_EQ(a.records[i].state, b.records[i].state);
    EXPECT_EQ(a.records[i].action, b.records[i].action);
    EXPECT_EQ(a.records[i].next_state, b.records[i].next_state);
    EXPECT_TRUE(kActions.is_admissible(a.records[i].state, a.records[i].action));
    EXPECT_GE(a.records[i].t, 1);
    EXPECT_LE(a.records[i].t, 7);
  }
}

TEST(SimulateTrajectories, CustomBehaviorAndInitialDistribution) {
  const auto cohort = sample_cohort(CovariateSpec{}, 30, 3);
  SimulationOptions options;
  options.initial_distribution = {1.0, 0.0, 0.0};
  options.behavior = [](Rng&, int, int, const std::vector<int>& admissible) {
    return admissible.front();
  };
  const auto dataset =
      simulate_trajectories(uniform_truth(), cohort, kActions, 4, 3, options);
  for (const auto& record : dataset.records) {
    EXPECT_EQ(record.action, 1);
    if (record.t == 1) EXPECT_EQ(record.state, 1);
  }
}

TEST(EndToEnd, FitRecoversGroundTruthFromLargeCohort) {
  // Parameter-recovery oracle through the whole simulate -> fit path.
  GroundTruthDynamics truth;
  truth.num_stages = 3;
  truth.design = {{"age", 50.0, 3.0},
                  {"blood_pressure", 110.0, 3.0},
                  {"exposure", 0.0, 1.0},
                  {"hormone", 700.0, 20.0}};
  truth.params[{1, 1}] = make_params({0.8, 2.4}, {-0.4, 0.2, -0.5, 0.1});
  truth.params[{1, 2}] = make_params({1.6, 3.2}, {-0.7, -0.3, -0.5, 0.1});
  truth.params[{2, 1}] = make_params({-1.2, 1.2}, {-0.4, 0.2, -0.5, 0.1});
  truth.params[{2, 2}] = make_params({-0.4, 2.0}, {-0.7, -0.3, -0.5, 0.1});
  truth.params[{3, 1}] = make_params({-2.4, -0.4}, {-0.8, 0.2, -0.5, 0.1});
  truth.params[{3, 2}] = make_params({-1.2, 0.8}, {-0.2, -0.3, -0.5, 0.1});

  const auto cohort = sample_cohort(CovariateSpec{}, 5000, 1337);
  const auto dataset = simulate_trajectories(truth, cohort, kActions, 8, 1337);

  const std::vector<std::string> columns = {"age", "blood_pressure", "exposure",
                                            "hormone"};
  for (int s = 1; s <= 3; ++s) {
    for (int a = 1; a <= 2; ++a) {
      const OrdinalDataset data = to_ordinal_dataset(dataset, s, a, columns);
      const FittedOrdinalModel model = fit(data);
      ASSERT_TRUE(model.converged) << "s=" << s << " a=" << a;

      // Express the fit in the truth's standardized coordinates.
      const auto& expected = truth.params_for(s, a);
      Eigen::VectorXd beta_z(4);
      double shift = 0.0;
      for (int k = 0; k < 4; ++k) {
        beta_z[k] = model.beta_original[k] * truth.design[k].scale;
        shift += model.beta_original[k] * truth.design[k].center;
      }
      const Eigen::VectorXd alpha_z = model.alpha_original.array() + shift;
      EXPECT_LT((alpha_z - expected.alpha).lpNorm<Eigen::Infinity>(), 0.1)
          << "s=" << s << " a=" << a;
      // Age and blood pressure are 0.97-correlated under the sampling law
      // (bp = age + 60 +/- 0.7), so only their sum is identified at this n;
      // exposure and hormone recover coordinate-wise.
      EXPECT_NEAR(beta_z[0] + beta_z[1], expected.beta[0] + expected.beta[1], 0.1)
          << "s=" << s << " a=" << a;
      EXPECT_NEAR(beta_z[2], expected.beta[2], 0.1) << "s=" << s << " a=" << a;
      EXPECT_NEAR(beta_z[3], expected.beta[3], 0.1) << "s=" << s << " a=" << a;

      // The operational target is the kernel itself: predicted next-stage
      // probabilities match the truth across sampled profiles.
      Rng probe(substream_seed(1337, 99, s, a));
      for (int rep = 0; rep < 20; ++rep) {
        const CovariateProfile p = sample_profile(CovariateSpec{}, probe);
        const auto truth_row = truth.kernel_row(s, a, p);
        const auto fitted_row =
            predict_row(model, design_vector(p, columns));
        for (std::size_t j = 0; j < truth_row.size(); ++j) {
          EXPECT_NEAR(fitted_row[j], truth_row[j], 0.05)
              << "s=" << s << " a=" << a << " j=" << j;
        }
      }
    }
  }
}

TEST(ToOrdinalDataset, FiltersContextAndEpoch) {
  const auto cohort = sample_cohort(CovariateSpec{}, 120, 29);
  const auto dataset = simulate_trajectories(uniform_truth(), cohort, kActions, 6, 29);
  const OrdinalDataset pooled = to_ordinal_dataset(dataset, 2, 1, {"age", "hormone"});
  EXPECT_EQ(pooled.context, (TransitionContext{0, 2, 1}));
  EXPECT_EQ(pooled.x.cols(), 2);
  std::size_t expected_rows = 0;
  std::size_t epoch3_rows = 0;
  for (const auto& record : dataset.records) {
    if (record.state == 2 && record.action == 1) {
      ++expected_rows;
      if (record.t == 3) ++epoch3_rows;
    }
  }
  EXPECT_EQ(pooled.size(), expected_rows);
  const OrdinalDataset at3 = to_ordinal_dataset(dataset, 2, 1, {"age"}, 3);
  EXPECT_EQ(at3.size(), epoch3_rows);
  EXPECT_EQ(at3.context.epoch, 3);
}

TEST(CountTransitions, TalliesAugmentedCells) {
  TrajectoryDataset dataset;
  dataset.horizon = 3;
  dataset.num_stages = 2;
  CovariateProfile young;
  young.age = 30.0;
  young.income = 1.0;
  CovariateProfile old;
  old.age = 70.0;
  old.income = 1.0;
  dataset.profiles = {young, old};
  dataset.records = {{0, 1, 1, 1, 2}, {0, 2, 2, 1, 2}, {1, 1, 1, 2, 1}};

  const CovariateGrid grid(std::vector<GridDimension>{{"age", {50.0}}});
  const AugmentedStateSpace space(2, 2);
  const ActionSet actions({{1, 2}, {1, 2}});
  const TransitionCounts counts = count_transitions(dataset, grid, space, actions);

  // Patient 0 is in cell 0, patient 1 in cell 1.
  const int s1c0 = space.label(1, 0) - 1;
  const int s2c0 = space.label(2, 0) - 1;
  const int s1c1 = space.label(1, 1) - 1;
  EXPECT_EQ(counts.counts[s1c0][0][s2c0], 1.0);
  EXPECT_EQ(counts.counts[s2c0][0][s2c0], 1.0);
  EXPECT_EQ(counts.counts[s1c1][1][s1c1], 1.0);
  double total = 0.0;
  for (const auto& per_action : counts.counts) {
    for (const auto& row : per_action) {
      for (double c : row) total += c;
    }
  }
  EXPECT_EQ(total, 3.0);
}

}  // namespace
}  // namespace dtr
