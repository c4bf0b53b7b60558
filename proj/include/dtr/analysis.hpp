#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dtr/cohort.hpp"
#include "dtr/covariate.hpp"
#include "dtr/mdp.hpp"
#include "dtr/ordinal.hpp"
#include "dtr/parallel.hpp"

namespace dtr {

/// Fits one proportional-odds model per (state, action) — or per
/// (epoch, state, action) when per_epoch — from simulated trajectories.
/// Independent fits run as a data-parallel kernel.
TransitionModelSet fit_transition_models(const TrajectoryDataset& dataset,
                                         const ActionSet& actions,
                                         const std::vector<std::string>& columns,
                                         const FitConfig& config = {},
                                         bool per_epoch = false,
                                         ExecMode mode = ExecMode::Serial);

/// Per-patient optimal action matrices for a whole cohort. Patients are
/// independent work items; results are collected in patient order.
std::vector<PolicySolution> solve_cohort(const std::vector<CovariateProfile>& cohort,
                                         const TransitionModelSet& models,
                                         const RewardParameters& params, int horizon,
                                         ExecMode mode = ExecMode::Serial);

/// Monte Carlo sensitivity of one action-matrix entry to one covariate.
struct SensitivityCurve {
  std::string covariate;
  int entry_t = 0;
  int entry_stage = 0;
  std::vector<double> grid;
  std::vector<double> proportion;  // fraction of cohorts prescribing treatment
  std::vector<double> lower;
  std::vector<double> upper;
  int reps = 0;
};

struct SensitivityRequest {
  std::string covariate;
  std::vector<double> grid;
  std::vector<std::pair<int, int>> entries;  // (t, stage)
  int reps = 100;
  int treatment_action = 2;
};

/// Computes curves for every requested entry of the action matrix in one
/// sweep: each (grid point, replicate) pair draws a profile with the
/// covariate pinned, solves the patient's MDP once, and feeds all entries.
/// Profile (g, r) uses substream (seed, Sensitivity, g, r), so serial and
/// parallel execution agree bitwise.
std::vector<SensitivityCurve> sensitivity_curves(const SensitivityRequest& request,
                                                 const TransitionModelSet& models,
                                                 const CovariateSpec& spec,
                                                 const RewardParameters& params,
                                                 int horizon, std::uint64_t seed,
                                                 ExecMode mode = ExecMode::Serial);

/// Single-entry convenience wrapper.
SensitivityCurve sensitivity_curve(const std::string& covariate,
                                   const std::vector<double>& grid, int entry_t,
                                   int entry_stage, int reps,
                                   const TransitionModelSet& models,
                                   const CovariateSpec& spec,
                                   const RewardParameters& params, int horizon,
                                   std::uint64_t seed,
                                   ExecMode mode = ExecMode::Serial);

/// Default sensitivity grid: `points` equally spaced values spanning
/// +/- span_sd training standard deviations ({0, 1} for indicators).
std::vector<double> default_sensitivity_grid(const std::string& covariate,
                                             const CovariateSpec& spec,
                                             int points = 21, double span_sd = 3.0);

/// Treatment-action proportions per (t, stage) for two fixed-income groups
/// built with common random numbers.
struct IncomeComparisonTable {
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  int group_size = 0;
  int treatment_action = 2;
  std::vector<std::vector<double>> lo;  // [t-1][stage-1]
  std::vector<std::vector<double>> hi;
};

IncomeComparisonTable income_comparison(double theta_lo, double theta_hi,
                                        std::size_t group_size,
                                        const TransitionModelSet& models,
                                        const CovariateSpec& spec,
                                        const RewardParameters& params, int horizon,
                                        std::uint64_t seed,
                                        ExecMode mode = ExecMode::Serial,
                                        int treatment_action = 2);

/// Per-stage verdict of an income comparison: does the high-income group
/// prescribe treatment at least as often at every epoch, and where do the
/// two curves cross?
struct StageDominance {
  int stage = 0;
  bool hi_weakly_dominates = false;
  bool all_ties = false;
  /// Epochs t >= 2 where the sign of (hi - lo) flips relative to t - 1.
  std::vector<int> crossover_epochs;
};

std::vector<StageDominance> dominance_summary(const IncomeComparisonTable& table);

}  // namespace dtr
