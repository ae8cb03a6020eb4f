#pragma once

// One-dimensional Wasserstein-1 distances and log-log rate fits.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hawkes_stein {

// Phi(x / sigma) and its primitive x Phi(x / sigma) + sigma phi(x / sigma).
double normal_cdf(double x, double sigma = 1.0);
double normal_cdf_primitive(double x, double sigma = 1.0);

// int |F_n(x) - Phi(x / sigma)| dx, exact up to rounding.
double w1_to_gaussian(std::span<const double> sample, double sigma2);

// int_0^1 |F_a^{-1}(u) - F_b^{-1}(u)| du; sizes may differ.
double w1_empirical(std::span<const double> a, std::span<const double> b);

struct RatePoint {
  double horizon;
  double estimate;
  double se;
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;  // log C
  bool weighted = true;
};

// Weighted least squares of log estimate on log horizon, weights (estimate / se)^2.
// Ordinary least squares when any se is zero.
RateFit fit_rate(const std::vector<RatePoint>& points);

// Bootstrap standard error of w1_to_gaussian.
double bootstrap_se(std::span<const double> sample, double sigma2, std::size_t resamples, std::uint64_t seed,
                    int threads = 0);
double bootstrap_se_serial(std::span<const double> sample, double sigma2, std::size_t resamples,
                           std::uint64_t seed);

// E[w1_to_gaussian] for n draws from N(0, sigma2) itself.
double w1_bias_floor(std::size_t n, double sigma2);

}  // namespace hawkes_stein
