#include <doctest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <random>

#include "hawkes_stein/wasserstein.hpp"

using namespace hawkes_stein;

namespace {

std::vector<double> gaussian_quantiles(std::size_t n, double sigma) {
  const boost::math::normal_distribution<> g(0.0, sigma);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = quantile(g, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return x;
}

std::vector<double> gaussian_draws(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> d(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = d(gen);
  return x;
}

double direct_w1(std::vector<double> x, double sigma) {
  std::sort(x.begin(), x.end());
  const boost::math::normal_distribution<> g(0.0, sigma);
  auto integrand = [&](double t) {
    const auto k = static_cast<double>(std::upper_bound(x.begin(), x.end(), t) - x.begin());
    return std::abs(k / static_cast<double>(x.size()) - cdf(g, t));
  };
  std::vector<double> knots{-12.0 * sigma};
  knots.insert(knots.end(), x.begin(), x.end());
  knots.push_back(12.0 * sigma);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, knots[i], knots[i + 1], 10, 1e-13);
  }
  return total;
}

}  // namespace

TEST_CASE("point mass at zero") {
  CHECK(w1_to_gaussian(std::vector<double>(7, 0.0), 1.0) == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-14));
}

TEST_CASE("gaussian quantiles are close") {
  const auto q = gaussian_quantiles(100000, 1.0);
  CHECK(w1_to_gaussian(q, 1.0) < 2e-3);
}

TEST_CASE("agrees with direct numerical integration") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto x = gaussian_draws(50, 1.3, seed);
    CHECK(w1_to_gaussian(x, 1.69) == doctest::Approx(direct_w1(x, 1.3)).epsilon(1e-9));
  }
  const std::vector<double> shifted{3.0, 3.5, 4.0};
  CHECK(w1_to_gaussian(shifted, 1.0) == doctest::Approx(direct_w1(shifted, 1.0)).epsilon(1e-9));
}

TEST_CASE("scale equivariance and translation sensitivity") {
  const auto x = gaussian_draws(500, 1.0, 9);
  std::vector<double> y(x), z(x);
  for (auto& v : y) v *= 3.0;
  for (auto& v : z) v += 0.5;
  CHECK(w1_to_gaussian(y, 9.0) == doctest::Approx(3.0 * w1_to_gaussian(x, 1.0)).epsilon(1e-12));
  CHECK(w1_to_gaussian(z, 1.0) >= 0.5 - w1_to_gaussian(x, 1.0) - 1e-12);
  CHECK(w1_to_gaussian(z, 1.0) != w1_to_gaussian(x, 1.0));
  CHECK_THROWS_AS(w1_to_gaussian(x, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(w1_to_gaussian(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("empirical w1") {
  const auto a = gaussian_draws(300, 1.0, 4);
  std::vector<double> b(a);
  for (auto& v : b) v += 1.0;
  CHECK(w1_empirical(a, a) == 0.0);
  CHECK(w1_empirical(b, a) == doctest::Approx(1.0));
  const std::vector<double> u{0.0, 1.0}, v{0.0, 0.5, 1.0};
  CHECK(w1_empirical(u, v) == doctest::Approx(1.0 / 6.0));
  const auto draws = gaussian_draws(100000, 1.0, 8);
  const auto q = gaussian_quantiles(100000, 1.0);
  CHECK(std::abs(w1_empirical(draws, q) - w1_to_gaussian(draws, 1.0)) < 2e-3);
  CHECK_THROWS_AS(w1_empirical(std::vector<double>{}, a), std::invalid_argument);
}

TEST_CASE("rate fits") {
  std::vector<RatePoint> p;
  for (double T : {10.0, 100.0, 1000.0, 5000.0}) p.push_back({T, 3.0 / std::sqrt(T), 0.1 / std::sqrt(T)});
  auto f = fit_rate(p);
  CHECK(f.slope == doctest::Approx(-0.5));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)));
  CHECK(f.weighted);
  for (auto& x : p) {
    x.estimate = 2.0 / x.horizon;
    x.se = 0.0;
  }
  f = fit_rate(p);
  CHECK(f.slope == doctest::Approx(-1.0));
  CHECK_FALSE(f.weighted);
  p[1].estimate = 0.0;
  CHECK_THROWS_AS(fit_rate(p), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({p[0], p[2]}), std::invalid_argument);
}

TEST_CASE("bootstrap: OpenMP and serial agree bitwise") {
  const auto x = gaussian_draws(2000, 1.0, 12);
  const double s = bootstrap_se_serial(x, 1.0, 100, 77);
  CHECK(bootstrap_se(x, 1.0, 100, 77, 1) == s);
  CHECK(bootstrap_se(x, 1.0, 100, 77, 3) == s);
  CHECK(s > 0.0);
}

TEST_CASE("bias floor matches the Monte Carlo mean for gaussian samples") {
  const std::size_t n = 200;
  const int m = 4000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < m; ++r) {
    const double d = w1_to_gaussian(gaussian_draws(n, 1.0, 1000 + r), 1.0);
    s += d;
    s2 += d * d;
  }
  const double mean = s / m, se = std::sqrt((s2 / m - mean * mean) / (m - 1));
  CHECK(std::abs(w1_bias_floor(n, 1.0) - mean) < 4.0 * se);
  CHECK(w1_bias_floor(4 * n, 1.0) == doctest::Approx(0.5 * w1_bias_floor(n, 1.0)).epsilon(0.02));
  CHECK(w1_bias_floor(n, 4.0) == doctest::Approx(2.0 * w1_bias_floor(n, 1.0)));
}
