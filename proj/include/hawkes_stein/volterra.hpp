#pragma once

// Causal convolutions and linear Volterra equations on uniform grids.

#include <cstddef>
#include <functional>
#include <vector>

#include "hawkes_stein/model.hpp"

namespace hawkes_stein {

// values[k] ~ f(k * dt), k = 0..n-1.
struct GridFunction {
  double dt = 1.0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double horizon() const { return values.empty() ? 0.0 : dt * static_cast<double>(values.size() - 1); }
  // Linear interpolation, constant beyond the last node.
  double operator()(double t) const;
  double trapezoid() const;
};

GridFunction sample_grid(const std::function<double(double)>& f, double dt, std::size_t n);

// Trapezoidal causal convolution, length min(f, g). Symmetric pair summation
// makes convolve(f, g) and convolve(g, f) bitwise equal.
GridFunction convolve(const GridFunction& f, const GridFunction& g);
GridFunction convolve_serial(const GridFunction& f, const GridFunction& g);

struct ResolventGrid {
  GridFunction base;
  double alpha = 0.0;
  double l1_tail_bound = 0.0;  // bound on int_horizon^inf psi
};

// psi = sum_{k>=1} alpha^k |phi|^{*k} as the solution of psi = alpha|phi| + alpha|phi| * psi.
ResolventGrid resolvent(const Kernel& kernel, double alpha, double horizon, double dt);

struct SeriesResolvent {
  GridFunction base;
  double truncation_bound = 0.0;  // sum_{k>K} (alpha ||phi||_1)^k
};

// Truncated Neumann series sum_{k<=K} alpha^k |phi|^{*k}.
SeriesResolvent resolvent_series(const Kernel& kernel, double alpha, double horizon, double dt,
                                 int terms);

// Grid solution of L = M + Phi * L.
GridFunction solve_volterra(const GridFunction& M, const GridFunction& Phi);

// m(t) = mu + int_0^t a_T phi(t - s) m(s) ds on [0, T].
GridFunction mean_intensity_nearly_unstable(const NearlyUnstable& spec, double dt);

}  // namespace hawkes_stein
