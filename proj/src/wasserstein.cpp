#include "hawkes_stein/wasserstein.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hawkes_stein/parallel.hpp"
#include "hawkes_stein/philox.hpp"

namespace hawkes_stein {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double density(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// int_x^inf (1 - Phi(u / sigma)) du
double upper_primitive(double x, double sigma) {
  const double z = x / sigma;
  return sigma * density(z) - x * 0.5 * std::erfc(z * kInvSqrt2);
}

// int_a^b |c - Phi(x / sigma)| dx for a <= b.
double piece(double a, double b, double c, double sigma) {
  if (!(b > a)) return 0.0;
  const double Fa = normal_cdf(a, sigma), Fb = normal_cdf(b, sigma);
  const double Ga = normal_cdf_primitive(a, sigma), Gb = normal_cdf_primitive(b, sigma);
  if (c <= Fa) return (Gb - Ga) - c * (b - a);
  if (c >= Fb) return c * (b - a) - (Gb - Ga);
  const double xs = std::clamp(-std::numbers::sqrt2 * sigma * boost::math::erfc_inv(2.0 * c), a, b);
  const double Gs = normal_cdf_primitive(xs, sigma);
  return (c * (xs - a) - (Gs - Ga)) + ((Gb - Gs) - c * (b - xs));
}

double w1_sorted(const std::vector<double>& x, double sigma) {
  const std::size_t n = x.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = normal_cdf_primitive(x.front(), sigma);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    total += piece(x[k], x[k + 1], static_cast<double>(k + 1) * inv_n, sigma);
  }
  return total + upper_primitive(x.back(), sigma);
}

double check_sigma(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw std::invalid_argument("sigma2 must be > 0");
  return std::sqrt(sigma2);
}

double resample_w1(std::span<const double> sample, double sigma, std::size_t b, std::uint64_t seed) {
  const std::size_t n = sample.size();
  CounterStream stream(seed, StreamDomain::Bootstrap, b, 0);
  std::vector<double> x(n);
  for (auto& v : x) {
    auto i = static_cast<std::size_t>(stream.uniform() * static_cast<double>(n));
    v = sample[std::min(i, n - 1)];
  }
  std::sort(x.begin(), x.end());
  return w1_sorted(x, sigma);
}

double standard_deviation(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  double m = 0.0;
  for (double x : v) m += x;
  m /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / sigma * kInvSqrt2); }

double normal_cdf_primitive(double x, double sigma) {
  const double z = x / sigma;
  return x * normal_cdf(z) + sigma * density(z);
}

double w1_to_gaussian(std::span<const double> sample, double sigma2) {
  const double sigma = check_sigma(sigma2);
  if (sample.empty()) throw std::invalid_argument("w1_to_gaussian: empty sample");
  std::vector<double> x(sample.begin(), sample.end());
  std::sort(x.begin(), x.end());
  return w1_sorted(x, sigma);
}

double w1_empirical(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("w1_empirical: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const std::size_t na = x.size(), nb = y.size();
  std::size_t i = 0, j = 0;
  double u = 0.0, total = 0.0;
  while (i < na && j < nb) {
    const auto lhs = (i + 1) * nb, rhs = (j + 1) * na;
    const double next = lhs <= rhs ? static_cast<double>(i + 1) / static_cast<double>(na)
                                   : static_cast<double>(j + 1) / static_cast<double>(nb);
    total += (next - u) * std::abs(x[i] - y[j]);
    u = next;
    if (lhs <= rhs) ++i;
    if (rhs <= lhs) ++j;
  }
  return total;
}

RateFit fit_rate(const std::vector<RatePoint>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_rate: need at least 3 points");
  RateFit fit;
  fit.points = points;
  fit.weighted = true;
  for (const auto& p : points) {
    if (!(p.estimate > 0.0) || !(p.horizon > 0.0)) throw std::invalid_argument("fit_rate: non-positive estimate");
    if (!(p.se > 0.0)) fit.weighted = false;
  }
  const std::size_t n = points.size();
  std::vector<double> x(n), y(n), w(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = std::log(points[k].horizon);
    y[k] = std::log(points[k].estimate);
    w[k] = fit.weighted ? std::pow(points[k].estimate / points[k].se, 2) : 1.0;
  }
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sw += w[k];
    sx += w[k] * x[k];
    sy += w[k] * y[k];
  }
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += w[k] * (x[k] - xm) * (x[k] - xm);
    sxy += w[k] * (x[k] - xm) * (y[k] - ym);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate: horizons must differ");
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  if (fit.weighted) {
    fit.slope_se = std::sqrt(1.0 / sxx);
  } else {
    double rss = 0.0;
    for (std::size_t k = 0; k < n; ++k) rss += std::pow(y[k] - fit.intercept - fit.slope * x[k], 2);
    fit.slope_se = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

double bootstrap_se(std::span<const double> sample, double sigma2, std::size_t resamples, std::uint64_t seed,
                    int threads) {
  const double sigma = check_sigma(sigma2);
  if (sample.empty() || resamples < 2) throw std::invalid_argument("bootstrap_se: need data and >= 2 resamples");
  const auto v = parallel_map<double>(resamples, [&](std::size_t b) { return resample_w1(sample, sigma, b, seed); },
                                      threads);
  return standard_deviation(v);
}

double bootstrap_se_serial(std::span<const double> sample, double sigma2, std::size_t resamples,
                           std::uint64_t seed) {
  const double sigma = check_sigma(sigma2);
  if (sample.empty() || resamples < 2) throw std::invalid_argument("bootstrap_se: need data and >= 2 resamples");
  const auto v = serial_map<double>(resamples, [&](std::size_t b) { return resample_w1(sample, sigma, b, seed); });
  return standard_deviation(v);
}

double w1_bias_floor(std::size_t n, double sigma2) {
  const double sigma = check_sigma(sigma2);
  if (n == 0) throw std::invalid_argument("w1_bias_floor: n must be >= 1");
  const double nd = static_cast<double>(n);
  const double log_nfact = std::lgamma(nd + 1.0);
  // de Moivre: E|X - np| = 2 k C(n,k) p^k q^(n-k+1), k = floor(np) + 1.
  auto mad = [&](double p) {
    const double q = 1.0 - p;
    if (!(p > 0.0) || !(q > 0.0)) return 0.0;
    const double k = std::floor(nd * p) + 1.0;
    if (k > nd) return 0.0;
    const double lg = std::log(2.0 * k) + log_nfact - std::lgamma(k + 1.0) - std::lgamma(nd - k + 1.0) +
                      k * std::log(p) + (nd - k + 1.0) * std::log(q);
    return std::exp(lg);
  };
  const double lim = 9.0, h = 1e-3;
  const auto steps = static_cast<std::size_t>(2.0 * lim / h);
  double s = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double z = -lim + h * static_cast<double>(i);
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    s += w * mad(normal_cdf(z));
  }
  return sigma * h * s / nd;
}

}  // namespace hawkes_stein
