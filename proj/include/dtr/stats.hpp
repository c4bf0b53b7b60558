#pragma once

#include <span>
#include <utility>

namespace dtr {

/// Standard normal quantile (inverse CDF), Wichura's AS 241 PPND16.
/// Accurate to about 1e-15 over (0, 1).
double normal_quantile(double p);

double mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);

/// Slope of the least-squares line through (x_i, y_i).
double least_squares_slope(std::span<const double> x, std::span<const double> y);

/// Logistic function 1 / (1 + exp(-x)), stable for large |x|.
double logistic(double x);

/// log(p / (1 - p)).
double logit(double p);

}  // namespace dtr
