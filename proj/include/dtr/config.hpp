#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dtr/analysis.hpp"
#include "dtr/cohort.hpp"
#include "dtr/covariate.hpp"
#include "dtr/ordinal.hpp"

namespace dtr {

enum class Approach { NonAdaptive, Adaptive };

struct SensitivityConfig {
  std::string covariate;
  std::vector<std::pair<int, int>> entries;  // (t, stage)
  int reps = 100;
  int points = 21;
  double span_sd = 3.0;
};

struct CompareConfig {
  double theta_lo = 0.0;
  double theta_hi = 0.0;
  int group_size = 100;
};

/// A whole experiment: everything the pipeline needs, in one diffable
/// document. The master seed is mandatory; nothing falls back to the clock.
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  CovariateSpec covariates;
  GroundTruthDynamics dynamics;
  std::vector<double> initial_distribution;  // empty = uniform over stages

  double reward_g = 0.7;
  double reward_lambda = 1.2;
  std::vector<double> cost_by_action = {0.0, 0.0, 5000.0};  // index = action id
  int horizon = 8;
  int num_stages = 3;

  FitConfig fitting;
  bool fit_per_epoch = false;
  bool include_income_in_design = false;

  int training_size = 500;

  Approach approach = Approach::NonAdaptive;
  std::vector<std::string> grid_covariates;  // adaptive approach only

  std::vector<SensitivityConfig> sensitivity;
  std::vector<CompareConfig> compare;

  /// Design-matrix column names implied by the flags above.
  std::vector<std::string> design_columns() const;
  /// Admissible actions (all actions in every stage).
  ActionSet stage_actions() const;
  RewardParameters reward_parameters() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& doc);

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// The bundled configuration reproducing the simulation study: 500 training
/// patients, J = 3 stages, N = 8, g = 0.7, lambda = 1.2, C_2 = 5000, the
/// documented covariate laws, default dynamics, four sensitivity entries and
/// the (10000, 80000) / (40000, 45000) income comparisons.
ExperimentConfig default_config();

ExperimentConfig load_config(const std::string& path);

/// Applies a `--set dotted.path=value` override; value parses as JSON when
/// possible and falls back to a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// FNV-1a hash of the canonical serialized config, as fixed-width hex.
std::string config_hash(const ExperimentConfig& config);

}  // namespace dtr
