#include "dtr/ordinal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "dtr/stats.hpp"

namespace dtr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nondecreasing(const Eigen::VectorXd& alpha) {
  for (Eigen::Index j = 1; j < alpha.size(); ++j) {
    if (alpha[j] < alpha[j - 1]) {
      throw InvalidParameterError("cut-points must be non-decreasing");
    }
  }
}

bool strictly_increasing(const Eigen::VectorXd& alpha) {
  for (Eigen::Index j = 1; j < alpha.size(); ++j) {
    if (alpha[j] <= alpha[j - 1]) return false;
  }
  return true;
}

/// Cumulative probability P(y <= j) for j = 0..J (0 and 1 at the ends).
double cumulative(const Eigen::VectorXd& alpha, double eta, int j) {
  if (j <= 0) return 0.0;
  if (j >= alpha.size() + 1) return 1.0;
  return logistic(alpha[j - 1] + eta);
}

/// Logistic density at cut j: sigma'(alpha_j + eta); zero at the ends.
double density(const Eigen::VectorXd& alpha, double eta, int j) {
  if (j <= 0 || j >= alpha.size() + 1) return 0.0;
  const double g = logistic(alpha[j - 1] + eta);
  return g * (1.0 - g);
}

}  // namespace

void OrdinalDataset::validate() const {
  if (y.empty()) throw std::invalid_argument("OrdinalDataset: no observations");
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("OrdinalDataset: design and response sizes differ");
  }
  if (num_categories < 1) throw std::invalid_argument("OrdinalDataset: J must be >= 1");
  for (int value : y) {
    if (value < 1 || value > num_categories) {
      throw std::invalid_argument("OrdinalDataset: response outside 1..J");
    }
  }
  if (!x.allFinite()) throw std::invalid_argument("OrdinalDataset: non-finite covariate");
}

std::vector<double> category_probabilities(const Eigen::VectorXd& alpha,
                                           double linear_predictor) {
  require_nondecreasing(alpha);
  const int num_categories = static_cast<int>(alpha.size()) + 1;
  std::vector<double> pi(num_categories);
  double prev = 0.0;
  for (int j = 1; j <= num_categories; ++j) {
    const double cum = cumulative(alpha, linear_predictor, j);
    pi[j - 1] = std::max(0.0, cum - prev);
    prev = cum;
  }
  return pi;
}

double log_likelihood(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                      const OrdinalDataset& data) {
  require_nondecreasing(alpha);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double eta = data.x.row(static_cast<Eigen::Index>(i)).dot(beta);
    const int y = data.y[i];
    const double pi = cumulative(alpha, eta, y) - cumulative(alpha, eta, y - 1);
    if (pi <= 0.0) return -kInf;
    total += std::log(pi);
  }
  return total;
}

namespace {

/// Score of a single observation with response category c, written into `out`
/// (layout [alpha; beta]). Returns the category probability.
double observation_score(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                         const Eigen::RowVectorXd& x, int c, Eigen::VectorXd& out) {
  const Eigen::Index num_cuts = alpha.size();
  const double eta = x.dot(beta);
  const double pi = cumulative(alpha, eta, c) - cumulative(alpha, eta, c - 1);
  out.setZero();
  if (pi <= 0.0) return pi;
  const double d_hi = density(alpha, eta, c);
  const double d_lo = density(alpha, eta, c - 1);
  if (c <= num_cuts) out[c - 1] += d_hi / pi;
  if (c - 1 >= 1) out[c - 2] -= d_lo / pi;
  const double slope_weight = (d_hi - d_lo) / pi;
  out.tail(beta.size()) = slope_weight * x.transpose();
  return pi;
}

}  // namespace

Eigen::VectorXd score(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                      const OrdinalDataset& data) {
  require_nondecreasing(alpha);
  const Eigen::Index dim = alpha.size() + beta.size();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd one(dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    observation_score(alpha, beta, data.x.row(static_cast<Eigen::Index>(i)),
                      data.y[i], one);
    total += one;
  }
  return total;
}

Eigen::MatrixXd fisher_information(const Eigen::VectorXd& alpha,
                                   const Eigen::VectorXd& beta,
                                   const OrdinalDataset& data) {
  require_nondecreasing(alpha);
  const int num_categories = static_cast<int>(alpha.size()) + 1;
  const Eigen::Index dim = alpha.size() + beta.size();
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd one(dim);
  // Expected information E[s s'] under the model at (alpha, beta).
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::RowVectorXd x = data.x.row(static_cast<Eigen::Index>(i));
    for (int c = 1; c <= num_categories; ++c) {
      const double pi = observation_score(alpha, beta, x, c, one);
      if (pi > 0.0) info.selfadjointView<Eigen::Lower>().rankUpdate(one, pi);
    }
  }
  return info.selfadjointView<Eigen::Lower>();
}

FittedOrdinalModel fit(const OrdinalDataset& data, const FitConfig& config) {
  data.validate();
  const int num_categories = data.num_categories;
  const int num_cuts = num_categories - 1;
  const int p = data.num_covariates();
  const auto n = static_cast<Eigen::Index>(data.size());

  std::vector<std::int64_t> counts(num_categories, 0);
  for (int y : data.y) counts[y - 1]++;
  for (int j = 1; j <= num_categories; ++j) {
    if (counts[j - 1] == 0) {
      throw DegenerateCategoryError(
          j, "context s=" + std::to_string(data.context.state) +
                 " a=" + std::to_string(data.context.action));
    }
  }
  if (static_cast<std::int64_t>(data.size()) <= p + num_cuts) {
    throw std::invalid_argument("fit: need n > p + J - 1 observations");
  }

  // Standardize columns (constant columns keep scale 1).
  Eigen::VectorXd mu(p);
  Eigen::VectorXd sigma(p);
  Eigen::MatrixXd z(n, p);
  for (int k = 0; k < p; ++k) {
    mu[k] = data.x.col(k).mean();
    const double ss = (data.x.col(k).array() - mu[k]).square().sum();
    sigma[k] = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 1.0;
    if (sigma[k] < 1e-12) sigma[k] = 1.0;
    z.col(k) = (data.x.col(k).array() - mu[k]) / sigma[k];
  }
  OrdinalDataset std_data{z, data.y, num_categories, data.context};

  // Start at the empirical cumulative logits with zero slopes.
  Eigen::VectorXd alpha(num_cuts);
  double cum = 0.0;
  for (int j = 0; j < num_cuts; ++j) {
    cum += static_cast<double>(counts[j]);
    alpha[j] = logit(cum / static_cast<double>(n));
  }
  for (int j = 1; j < num_cuts; ++j) {
    if (alpha[j] <= alpha[j - 1]) alpha[j] = alpha[j - 1] + 1e-6;
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);

  FittedOrdinalModel model;
  model.num_categories = num_categories;
  model.mean = mu;
  model.sd = sigma;
  model.context = data.context;

  double ll = log_likelihood(alpha, beta, std_data);
  model.log_likelihood_path.push_back(ll);
  const Eigen::Index dim = num_cuts + p;
  int iteration = 0;
  for (; iteration < config.max_iterations; ++iteration) {
    const Eigen::VectorXd g = score(alpha, beta, std_data);
    if (g.lpNorm<Eigen::Infinity>() < config.gradient_tol) {
      model.converged = true;
      break;
    }
    Eigen::MatrixXd info = fisher_information(alpha, beta, std_data);
    info.diagonal().array() += 1e-10;  // keeps the solve well-posed for constant columns
    const Eigen::VectorXd direction = info.ldlt().solve(g);
    if (!direction.allFinite()) break;

    // Step-halving: accept only monotone cut-points and non-decreasing likelihood.
    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd alpha_new(num_cuts);
    Eigen::VectorXd beta_new(p);
    double ll_new = 0.0;
    for (int h = 0; h <= config.max_step_halvings; ++h, step *= 0.5) {
      alpha_new = alpha + step * direction.head(num_cuts);
      beta_new = beta + step * direction.tail(p);
      if (!strictly_increasing(alpha_new)) continue;
      ll_new = log_likelihood(alpha_new, beta_new, std_data);
      if (ll_new >= ll - 1e-12) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;

    double change = (alpha_new - alpha).lpNorm<Eigen::Infinity>();
    change = std::max(change, (beta_new - beta).lpNorm<Eigen::Infinity>());
    alpha = alpha_new;
    beta = beta_new;
    ll = ll_new;
    model.log_likelihood_path.push_back(ll);
    if (beta.lpNorm<Eigen::Infinity>() > config.separation_bound) {
      model.separation_warning = true;
      break;
    }
    if (change < config.param_change_tol) {
      model.converged = true;
      ++iteration;
      break;
    }
  }

  model.alpha = alpha;
  model.beta = beta;
  model.iterations = iteration;
  model.log_likelihood = ll;

  // Back-transform to raw covariate units:
  //   beta_raw_k  = beta_k / sd_k
  //   alpha_raw_j = alpha_j - sum_k beta_k mean_k / sd_k
  model.beta_original = beta.array() / sigma.array();
  const double shift = (beta.array() * mu.array() / sigma.array()).sum();
  model.alpha_original = alpha.array() - shift;

  Eigen::MatrixXd info = fisher_information(alpha, beta, std_data);
  info.diagonal().array() += 1e-10;
  const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(dim, dim));
  Eigen::MatrixXd transform = Eigen::MatrixXd::Zero(dim, dim);
  transform.topLeftCorner(num_cuts, num_cuts).setIdentity();
  for (int j = 0; j < num_cuts; ++j) {
    transform.block(j, num_cuts, 1, p) = (-mu.array() / sigma.array()).matrix().transpose();
  }
  transform.bottomRightCorner(p, p) =
      (1.0 / sigma.array()).matrix().asDiagonal().toDenseMatrix();
  const Eigen::MatrixXd cov_raw = transform * cov * transform.transpose();
  model.se_alpha_original = cov_raw.diagonal().head(num_cuts).array().max(0.0).sqrt();
  model.se_beta_original = cov_raw.diagonal().tail(p).array().max(0.0).sqrt();
  return model;
}

std::vector<double> predict_row(const FittedOrdinalModel& model,
                                const Eigen::VectorXd& x) {
  if (x.size() != model.beta.size()) {
    throw std::invalid_argument("predict_row: expected " +
                                std::to_string(model.beta.size()) + " covariates, got " +
                                std::to_string(x.size()));
  }
  const Eigen::VectorXd z = (x - model.mean).array() / model.sd.array();
  return category_probabilities(model.alpha, z.dot(model.beta));
}

Interval confidence_band(double p_hat, std::int64_t n, double level) {
  if (p_hat < 0.0 || p_hat > 1.0) {
    throw std::invalid_argument("confidence_band: p_hat outside [0, 1]");
  }
  if (n < 1) throw std::invalid_argument("confidence_band: n must be >= 1");
  const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
  const double half = z * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
  return {std::max(0.0, p_hat - half), std::min(1.0, p_hat + half)};
}

std::pair<std::int64_t, std::int64_t> parameter_counts(int num_categories,
                                                       int num_covariates,
                                                       int num_actions, int horizon) {
  if (num_categories < 1 || num_covariates < 1 || num_actions < 1 || horizon < 1) {
    throw std::invalid_argument("parameter_counts: all inputs must be positive");
  }
  const std::int64_t J = num_categories;
  const std::int64_t p = num_covariates;
  const std::int64_t A = num_actions;
  const std::int64_t T = horizon;
  return {J * (p + J - 1) * A, J * T * (J - 1) * (p + 1) * A};
}

nlohmann::json FittedOrdinalModel::to_json() const {
  nlohmann::json doc;
  doc["alpha"] = std::vector<double>(alpha.begin(), alpha.end());
  doc["beta"] = std::vector<double>(beta.begin(), beta.end());
  doc["standardization"] = {{"mean", std::vector<double>(mean.begin(), mean.end())},
                            {"sd", std::vector<double>(sd.begin(), sd.end())}};
  doc["context"] = {{"s", context.state}, {"a", context.action}};
  if (context.epoch != 0) doc["context"]["t"] = context.epoch;
  doc["columns"] = columns;
  doc["alpha_original"] =
      std::vector<double>(alpha_original.begin(), alpha_original.end());
  doc["beta_original"] = std::vector<double>(beta_original.begin(), beta_original.end());
  doc["se_alpha_original"] =
      std::vector<double>(se_alpha_original.begin(), se_alpha_original.end());
  doc["se_beta_original"] =
      std::vector<double>(se_beta_original.begin(), se_beta_original.end());
  doc["converged"] = converged;
  doc["separation_warning"] = separation_warning;
  doc["iterations"] = iterations;
  doc["log_likelihood"] = log_likelihood;
  doc["J"] = num_categories;
  return doc;
}

namespace {

Eigen::VectorXd to_vector(const nlohmann::json& node) {
  const auto values = node.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

}  // namespace

FittedOrdinalModel FittedOrdinalModel::from_json(const nlohmann::json& doc) {
  FittedOrdinalModel model;
  model.alpha = to_vector(doc.at("alpha"));
  model.beta = to_vector(doc.at("beta"));
  model.mean = to_vector(doc.at("standardization").at("mean"));
  model.sd = to_vector(doc.at("standardization").at("sd"));
  model.context.state = doc.at("context").at("s").get<int>();
  model.context.action = doc.at("context").at("a").get<int>();
  model.context.epoch = doc.at("context").value("t", 0);
  model.columns = doc.value("columns", std::vector<std::string>{});
  model.num_categories = doc.value("J", static_cast<int>(model.alpha.size()) + 1);
  if (doc.contains("alpha_original")) {
    model.alpha_original = to_vector(doc.at("alpha_original"));
    model.beta_original = to_vector(doc.at("beta_original"));
  }
  if (doc.contains("se_alpha_original")) {
    model.se_alpha_original = to_vector(doc.at("se_alpha_original"));
    model.se_beta_original = to_vector(doc.at("se_beta_original"));
  }
  model.converged = doc.value("converged", true);
  model.separation_warning = doc.value("separation_warning", false);
  model.iterations = doc.value("iterations", 0);
  model.log_likelihood = doc.value("log_likelihood", 0.0);
  return model;
}

}  // namespace dtr
