#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtr/covariate.hpp"
#include "dtr/ordinal.hpp"
#include "dtr/parallel.hpp"
#include "dtr/rng.hpp"

namespace dtr {

/// Sampling laws of the simulated covariates. Normal parameters are
/// (mean, standard deviation); blood pressure is drawn conditionally on the
/// drawn age; income is offset + multiplier * Pareto(scale, shape).
struct ExtraBinaryColumn {
  std::string name;
  double rate = 0.0;
};

struct CovariateSpec {
  double age_mean = 50.0;
  double age_sd = 3.0;
  double bp_offset = 60.0;
  double bp_sd = 0.7;
  double exposure_rate = 0.1;
  double hormone_mean = 700.0;
  double hormone_sd = 20.0;
  double income_offset = 10000.0;
  double income_multiplier = 1e6;
  double income_pareto_scale = 100.0;
  double income_pareto_shape = 10.0;
  std::vector<ExtraBinaryColumn> extra;
};

/// Sampled covariate values may be pinned to fixed numbers; the pinned value
/// still participates in downstream conditional draws (blood pressure follows
/// the pinned age) and the random stream is consumed identically either way,
/// so pinned and unpinned cohorts pair up draw for draw.
using CovariatePins = std::map<std::string, double>;

CovariateProfile sample_profile(const CovariateSpec& spec, Rng& rng,
                                const CovariatePins* pins = nullptr);

std::vector<CovariateProfile> sample_cohort(const CovariateSpec& spec, std::size_t n,
                                            std::uint64_t seed);

/// Cohort with every income pinned to theta; other covariates match
/// sample_cohort(spec, n, seed) exactly (common random numbers).
std::vector<CovariateProfile> fixed_income_cohort(const CovariateSpec& spec,
                                                  double theta, std::size_t n,
                                                  std::uint64_t seed);

/// Raw-covariate affine transform used inside the true transition law.
struct DesignColumn {
  std::string name;
  double center = 0.0;
  double scale = 1.0;
};

/// The data-generating transition law: one set of proportional-odds
/// parameters per (state, action) over the transformed design.
struct GroundTruthDynamics {
  struct Params {
    Eigen::VectorXd alpha;  // strictly increasing, length J-1
    Eigen::VectorXd beta;   // length = design.size()
  };

  std::vector<DesignColumn> design;
  std::map<std::pair<int, int>, Params> params;  // key (state, action)
  int num_stages = 0;

  const Params& params_for(int s, int a) const;
  std::vector<double> kernel_row(int s, int a, const CovariateProfile& profile) const;
  void validate() const;
};

struct TrajectoryRecord {
  int patient_id = 0;  // 0-based index into profiles
  int t = 0;
  int state = 0;
  int action = 0;
  int next_state = 0;
};

struct TrajectoryDataset {
  std::vector<CovariateProfile> profiles;
  std::vector<TrajectoryRecord> records;
  int horizon = 0;
  int num_stages = 0;
};

/// Chooses the action taken at (t, s) during data generation.
using BehaviorRule = std::function<int(Rng&, int t, int s, const std::vector<int>&)>;

struct SimulationOptions {
  /// Initial-stage distribution; empty means uniform over 1..J.
  std::vector<double> initial_distribution;
  /// Action-assignment rule; null means uniform over the admissible set.
  BehaviorRule behavior;
  ExecMode mode = ExecMode::Serial;
};

/// Simulates one trajectory per patient under the true dynamics. Patient i
/// uses substream (seed, Trajectory, i), so results do not depend on
/// execution order.
TrajectoryDataset simulate_trajectories(const GroundTruthDynamics& truth,
                                        const std::vector<CovariateProfile>& cohort,
                                        const ActionSet& actions, int horizon,
                                        std::uint64_t seed,
                                        const SimulationOptions& options = {});

/// Rows of `dataset` with (state, action) == (s, a), as an ordinal-regression
/// dataset over the named covariate columns. epoch > 0 keeps only records at
/// that t and tags the context accordingly.
OrdinalDataset to_ordinal_dataset(const TrajectoryDataset& dataset, int s, int a,
                                  const std::vector<std::string>& columns,
                                  int epoch = 0);

/// Tallies empirical transitions of `dataset` over the augmented state space.
TransitionCounts count_transitions(const TrajectoryDataset& dataset,
                                   const CovariateGrid& grid,
                                   const AugmentedStateSpace& space,
                                   const ActionSet& stage_actions);

}  // namespace dtr
