#include "dtr/stats.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dtr/rng.hpp"

namespace dtr {
namespace {

TEST(NormalQuantile, MatchesKnownValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-15);
  EXPECT_NEAR(normal_quantile(0.841344746068543), 1.0, 1e-9);
  EXPECT_NEAR(normal_quantile(0.025), -normal_quantile(0.975), 1e-12);
}

TEST(NormalQuantile, InvertsErfBasedCdf) {
  for (double p : {0.001, 0.01, 0.1, 0.3, 0.7, 0.9, 0.99, 0.999}) {
    const double z = normal_quantile(p);
    const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
    EXPECT_NEAR(cdf, p, 1e-12) << "p=" << p;
  }
}

TEST(LeastSquaresSlope, ExactOnLine) {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2.0, 3.5, 5.0, 6.5, 8.0};
  EXPECT_NEAR(least_squares_slope(x, y), 1.5, 1e-12);
}

TEST(Logistic, MatchesClosedForm) {
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(std::log(3.0)), 0.75, 1e-15);
  EXPECT_NEAR(logistic(-40.0) + logistic(40.0), 1.0, 1e-15);
  EXPECT_NEAR(logit(logistic(1.7)), 1.7, 1e-12);
}

TEST(Rng, DeterministicStreams) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform01(), b.uniform01());
  }
  // Distinct substreams decorrelate.
  EXPECT_NE(substream_seed(1, 2, 3), substream_seed(1, 2, 4));
  EXPECT_NE(substream_seed(1, 2, 3), substream_seed(1, 3, 3));
}

TEST(Rng, NormalMomentsNearStandard) {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(sum_sq / n, 1.0, 6.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Rng, ParetoSupportAndMean) {
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.pareto(100.0, 10.0);
    ASSERT_GE(x, 100.0);
    sum += x;
  }
  // Mean of Pareto(scale 100, shape 10) is 1000/9.
  EXPECT_NEAR(sum / n, 1000.0 / 9.0, 0.5);
}

}  // namespace
}  // namespace dtr
