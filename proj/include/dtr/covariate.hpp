#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "dtr/mdp.hpp"
#include "dtr/ordinal.hpp"

namespace dtr {

/// One patient's covariates at diagnosis. `extra` holds optional binary
/// marker columns (paired with `extra_names`).
struct CovariateProfile {
  double age = 0.0;
  double blood_pressure = 0.0;
  double exposure = 0.0;
  double hormone = 0.0;
  double income = 1.0;
  std::vector<double> extra;
  std::vector<std::string> extra_names;

  double value(std::string_view name) const;
  void validate() const;
};

/// Discretization of selected covariates into a finite grid of cells.
/// A dimension with k interior break points has k + 1 levels.
struct GridDimension {
  std::string covariate;
  std::vector<double> breaks;

  std::size_t levels() const { return breaks.size() + 1; }
  std::size_t level_of(double value) const;
};

class CovariateGrid {
public:
  CovariateGrid() = default;
  explicit CovariateGrid(std::vector<GridDimension> dims);

  std::size_t cell_count() const;
  /// Mixed-radix cell index in 0..cell_count()-1; total function by construction.
  std::size_t cell_of(const CovariateProfile& profile) const;
  const std::vector<GridDimension>& dimensions() const { return dims_; }

  /// Builds the default grid: continuous covariates cut at training-sample
  /// tertiles, indicator covariates kept binary.
  static CovariateGrid tertiles(const std::vector<CovariateProfile>& training,
                                const std::vector<std::string>& covariates);

private:
  std::vector<GridDimension> dims_;
};

/// Bijection between (stage, cell) pairs and augmented state labels
/// 1..J*|Omega|.
class AugmentedStateSpace {
public:
  AugmentedStateSpace(int num_stages, std::size_t num_cells)
      : num_stages_(num_stages), num_cells_(num_cells) {}

  std::size_t size() const { return static_cast<std::size_t>(num_stages_) * num_cells_; }
  int num_stages() const { return num_stages_; }
  std::size_t num_cells() const { return num_cells_; }

  int label(int stage, std::size_t cell) const {
    return static_cast<int>((static_cast<std::size_t>(stage) - 1) * num_cells_ + cell) + 1;
  }
  std::pair<int, std::size_t> split(int label) const {
    const std::size_t index = static_cast<std::size_t>(label) - 1;
    return {static_cast<int>(index / num_cells_) + 1, index % num_cells_};
  }

private:
  int num_stages_;
  std::size_t num_cells_;
};

/// Parameters of the quality-of-life reward model. Actions are identified by
/// id; id 1 (remission/surveillance) must be cost-free.
struct RewardParameters {
  double geographic_factor = 0.7;          // g
  std::vector<double> cost_by_action;      // cost_by_action[a] = C_a; index 0 unused
  double decay_rate = 1.2;                 // lambda
  double income = 1.0;                     // theta
  int horizon = 8;                         // N
  int num_stages = 3;                      // J

  double cost(int action) const { return cost_by_action.at(action); }
  void validate() const;
};

/// Stage reward g (i - j) / (t + 1)^2 - (C_a / theta) e^{-lambda t}.
double stage_reward(int i, int j, int action, int t, const RewardParameters& params);

/// Terminal reward g (J - j) / (N + 1)^2.
double terminal_reward(int j, const RewardParameters& params);

/// Fitted transition models keyed by (epoch, state, action); epoch 0 entries
/// are time-homogeneous and serve every t.
struct TransitionModelSet {
  std::map<std::tuple<int, int, int>, FittedOrdinalModel> models;
  bool per_epoch = false;
  std::vector<std::string> design_columns;

  const FittedOrdinalModel& model_for(int t, int s, int a) const;
  void insert(FittedOrdinalModel model);
};

/// Extracts the design vector named by `columns` from a profile.
Eigen::VectorXd design_vector(const CovariateProfile& profile,
                              const std::vector<std::string>& columns);

/// Builds the per-patient J-state MDP of the non-adaptive approach: kernel
/// rows come from the fitted models evaluated at the (fixed) profile, rewards
/// from the quality-of-life model with theta = profile.income.
FiniteHorizonMDP build_nonadaptive_mdp(const TransitionModelSet& models,
                                       const CovariateProfile& profile,
                                       const RewardParameters& params, int horizon);

/// Empirical transition counts over the augmented state space; indexed
/// [augmented origin - 1][action index][augmented destination - 1].
struct TransitionCounts {
  std::vector<std::vector<std::vector<double>>> counts;
};

/// Builds the augmented-state MDP of the adaptive approach from empirical
/// counts. Rows with zero total count get add-one smoothing when enabled and
/// raise UnestimableRowError otherwise. The stage reward depends only on
/// (stage_i, action, stage_j, t); covariate cells never change it.
FiniteHorizonMDP build_adaptive_mdp(const TransitionCounts& counts,
                                    const AugmentedStateSpace& space,
                                    const ActionSet& stage_actions,
                                    const RewardParameters& params, int horizon,
                                    bool add_one_smoothing = true);

/// Solves an MDP for its optimal action matrix (delegates to backward
/// induction).
PolicySolution action_matrix(const FiniteHorizonMDP& mdp);

/// Stage-level view of an augmented-state solution: entry [t-1][stage-1][cell]
/// is the optimal action at (t, stage, cell).
std::vector<std::vector<std::vector<int>>> stage_projection(
    const PolicySolution& solution, const AugmentedStateSpace& space);

/// Empirical distribution of a cohort over grid cells. Solving never needs
/// it (policies are computed for every starting cell); offered for reporting.
std::vector<double> cell_occupancy(const std::vector<CovariateProfile>& cohort,
                                   const CovariateGrid& grid);

}  // namespace dtr
