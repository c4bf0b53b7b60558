#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "dtr/errors.hpp"

namespace dtr {

/// Identifies which transition law a dataset or fitted model describes.
/// epoch == 0 means pooled over time (the time-homogeneous default).
struct TransitionContext {
  int epoch = 0;
  int state = 0;
  int action = 0;

  auto operator<=>(const TransitionContext&) const = default;
};

/// Rows of (covariates, ordinal next state) for one transition context.
struct OrdinalDataset {
  Eigen::MatrixXd x;       // n x p design matrix
  std::vector<int> y;      // responses in 1..num_categories
  int num_categories = 0;  // J
  TransitionContext context;

  std::size_t size() const { return y.size(); }
  int num_covariates() const { return static_cast<int>(x.cols()); }

  /// Throws when shapes disagree or a response is out of range.
  void validate() const;
};

struct FitConfig {
  int max_iterations = 100;
  double gradient_tol = 1e-8;
  double param_change_tol = 1e-10;
  int max_step_halvings = 20;
  double separation_bound = 30.0;
};

/// Proportional-odds cumulative logit model
///   logit P(y <= j | x) = alpha_j + beta' x
/// with cut-points alpha strictly increasing and slopes beta shared across
/// categories. `alpha`/`beta` are in standardized covariate units (columns
/// centered at `mean` and scaled by `sd`); `alpha_original`/`beta_original`
/// are the equivalent parameters for raw covariates.
struct FittedOrdinalModel {
  int num_categories = 0;
  std::vector<std::string> columns;

  Eigen::VectorXd alpha;  // J-1 cut-points, standardized units
  Eigen::VectorXd beta;   // p slopes, standardized units
  Eigen::VectorXd mean;   // standardization centers
  Eigen::VectorXd sd;     // standardization scales

  Eigen::VectorXd alpha_original;
  Eigen::VectorXd beta_original;
  Eigen::VectorXd se_alpha_original;
  Eigen::VectorXd se_beta_original;

  bool converged = false;
  bool separation_warning = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  std::vector<double> log_likelihood_path;  // accepted iterates, non-decreasing
  TransitionContext context;

  nlohmann::json to_json() const;
  static FittedOrdinalModel from_json(const nlohmann::json& doc);
};

/// Category probabilities pi_j = logistic(alpha_j + eta) - logistic(alpha_{j-1} + eta)
/// with alpha_0 = -inf and alpha_J = +inf. Requires alpha non-decreasing.
std::vector<double> category_probabilities(const Eigen::VectorXd& alpha,
                                           double linear_predictor);

/// Maximum-likelihood fit via Fisher scoring with step-halving. Covariate
/// columns are standardized internally; results are reported in both units.
FittedOrdinalModel fit(const OrdinalDataset& data, const FitConfig& config = {});

/// Probabilities over categories 1..J at a raw covariate vector.
std::vector<double> predict_row(const FittedOrdinalModel& model,
                                const Eigen::VectorXd& x);

/// Multinomial log-likelihood at (alpha, beta) on the dataset as given
/// (no standardization). Returns -infinity when some observed category has
/// probability zero; throws InvalidParameterError when alpha decreases.
double log_likelihood(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                      const OrdinalDataset& data);

/// Analytic score (gradient of the log-likelihood) with layout [alpha; beta].
Eigen::VectorXd score(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                      const OrdinalDataset& data);

/// Expected (Fisher) information with layout [alpha; beta].
Eigen::MatrixXd fisher_information(const Eigen::VectorXd& alpha,
                                   const Eigen::VectorXd& beta,
                                   const OrdinalDataset& data);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Asymptotic confidence band p_hat +/- z sqrt(p_hat (1 - p_hat) / n),
/// clamped to [0, 1].
Interval confidence_band(double p_hat, std::int64_t n, double level = 0.95);

/// (proportional-odds, multinomial-logit) free-parameter counts for a
/// J-category response with p covariates, |A| actions and horizon T.
std::pair<std::int64_t, std::int64_t> parameter_counts(int num_categories,
                                                       int num_covariates,
                                                       int num_actions, int horizon);

}  // namespace dtr
