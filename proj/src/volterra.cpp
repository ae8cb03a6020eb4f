#include "hawkes_stein/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hawkes_stein {

namespace {

std::size_t grid_size(double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw std::invalid_argument("grid: need dt > 0 and horizon >= 0");
  return static_cast<std::size_t>(std::llround(horizon / dt)) + 1;
}

void check_dt(const GridFunction& f, const GridFunction& g) {
  if (f.dt != g.dt) throw std::invalid_argument("grid functions have different dt");
}

// dt * trapezoid sum_{j=0}^{k} f_j g_{k-j}, summed in symmetric pairs.
double conv_at(const std::vector<double>& f, const std::vector<double>& g, std::size_t k, double dt) {
  if (k == 0) return 0.0;
  double s = 0.5 * (f[0] * g[k] + f[k] * g[0]);
  std::size_t j = 1;
  for (; 2 * j < k; ++j) s += f[j] * g[k - j] + f[k - j] * g[j];
  if (2 * j == k) s += f[j] * g[j];
  return dt * s;
}

}  // namespace

double GridFunction::operator()(double t) const {
  if (values.empty()) return 0.0;
  if (t <= 0.0) return values.front();
  const double x = t / dt;
  const auto k = static_cast<std::size_t>(x);
  if (k + 1 >= values.size()) return values.back();
  const double w = x - static_cast<double>(k);
  return values[k] + w * (values[k + 1] - values[k]);
}

double GridFunction::trapezoid() const {
  if (values.size() < 2) return 0.0;
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t k = 1; k + 1 < values.size(); ++k) s += values[k];
  return dt * s;
}

GridFunction sample_grid(const std::function<double(double)>& f, double dt, std::size_t n) {
  GridFunction g{dt, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) g.values[k] = f(static_cast<double>(k) * dt);
  return g;
}

GridFunction convolve(const GridFunction& f, const GridFunction& g) {
  check_dt(f, g);
  const std::size_t n = std::min(f.size(), g.size());
  GridFunction out{f.dt, std::vector<double>(n)};
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t k = 0; k < sn; ++k) {
    out.values[k] = conv_at(f.values, g.values, static_cast<std::size_t>(k), f.dt);
  }
  return out;
}

GridFunction convolve_serial(const GridFunction& f, const GridFunction& g) {
  check_dt(f, g);
  const std::size_t n = std::min(f.size(), g.size());
  GridFunction out{f.dt, std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) out.values[k] = conv_at(f.values, g.values, k, f.dt);
  return out;
}

GridFunction solve_volterra(const GridFunction& M, const GridFunction& Phi) {
  check_dt(M, Phi);
  const std::size_t n = std::min(M.size(), Phi.size());
  double norm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    norm += (k == 0 || k + 1 == n ? 0.5 : 1.0) * std::abs(Phi.values[k]);
  }
  norm *= Phi.dt;
  if (!(norm < 1.0)) throw std::invalid_argument("solve_volterra: ||Phi||_1 >= 1");
  const double dt = M.dt;
  const auto& p = Phi.values;
  GridFunction L{dt, std::vector<double>(n)};
  auto& l = L.values;
  if (n == 0) return L;
  l[0] = M.values[0];
  const double diag = 1.0 - 0.5 * dt * p[0];
  for (std::size_t k = 1; k < n; ++k) {
    double s = 0.5 * p[k] * l[0];
    for (std::size_t j = 1; j < k; ++j) s += p[j] * l[k - j];
    l[k] = (M.values[k] + dt * s) / diag;
  }
  return L;
}

ResolventGrid resolvent(const Kernel& kernel, double alpha, double horizon, double dt) {
  const double r = alpha * kernel.l1_norm();
  if (!(alpha >= 0.0) || !(r < 1.0)) throw std::invalid_argument("resolvent: need alpha * ||phi||_1 < 1");
  const std::size_t n = grid_size(horizon, dt);
  const GridFunction a = sample_grid([&](double t) { return alpha * std::abs(kernel(t)); }, dt, n);
  ResolventGrid out;
  out.alpha = alpha;
  out.base = solve_volterra(a, a);
  const double total = r / (1.0 - r);
  double tail = total;
  if (horizon > 0.0) tail = std::min(tail, alpha * kernel.first_moment() / (horizon * (1.0 - r) * (1.0 - r)));
  out.l1_tail_bound = tail;
  return out;
}

SeriesResolvent resolvent_series(const Kernel& kernel, double alpha, double horizon, double dt,
                                 int terms) {
  const double r = alpha * kernel.l1_norm();
  if (!(alpha >= 0.0) || !(r < 1.0)) throw std::invalid_argument("resolvent_series: need alpha * ||phi||_1 < 1");
  if (terms < 1) throw std::invalid_argument("resolvent_series: terms must be >= 1");
  const std::size_t n = grid_size(horizon, dt);
  const GridFunction a = sample_grid([&](double t) { return alpha * std::abs(kernel(t)); }, dt, n);
  SeriesResolvent out;
  out.base = a;
  GridFunction power = a;
  for (int k = 2; k <= terms; ++k) {
    power = convolve(a, power);
    for (std::size_t i = 0; i < n; ++i) out.base.values[i] += power.values[i];
  }
  out.truncation_bound = std::pow(r, terms + 1) / (1.0 - r);
  return out;
}

GridFunction mean_intensity_nearly_unstable(const NearlyUnstable& spec, double dt) {
  const auto violations = validate(ModelSpec{spec});
  if (!violations.empty()) throw std::invalid_argument("mean_intensity: " + violations.front().message);
  const std::size_t n = grid_size(spec.horizon_T, dt);
  const double a = spec.a_T();
  const GridFunction M{dt, std::vector<double>(n, spec.mu)};
  const GridFunction Phi = sample_grid([&](double t) { return a * spec.kernel(t); }, dt, n);
  return solve_volterra(M, Phi);
}

}  // namespace hawkes_stein
