#include "hawkes_stein/driving_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hawkes_stein/philox.hpp"
#include "hawkes_stein/poisson_sampler.hpp"

namespace hawkes_stein {

std::uint64_t sample_poisson(double mean, CounterStream& stream) {
  if (!(mean > 0.0)) return 0;
  if (mean < 10.0) {
    double p = std::exp(-mean);
    double cdf = p;
    const double u = stream.uniform();
    std::uint64_t k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (p == 0.0 && cdf < u) break;  // u in the rounding gap of the upper tail
    }
    return k;
  }
  const double smu = std::sqrt(mean);
  const double log_mean = std::log(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * log_mean - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

DrivingMeasure::DrivingMeasure(std::uint64_t seed, double cell_dt, double cell_dtheta)
    : seed_(seed), cell_dt_(cell_dt), cell_dtheta_(cell_dtheta) {
  if (!(cell_dt > 0.0) || !(cell_dtheta > 0.0)) {
    throw std::invalid_argument("DrivingMeasure: cell sizes must be positive");
  }
}

std::int64_t DrivingMeasure::time_cell(double t) const {
  return static_cast<std::int64_t>(std::floor(t / cell_dt_));
}

std::int64_t DrivingMeasure::strips_for(double theta_hi) const {
  if (theta_hi < 0.0) return 0;
  return static_cast<std::int64_t>(std::floor(theta_hi / cell_dtheta_)) + 1;
}

std::size_t DrivingMeasure::cell_count(CellIndex cell) const {
  CounterStream stream(seed_, StreamDomain::MeasureCell, static_cast<std::uint64_t>(cell.i),
                       static_cast<std::uint32_t>(cell.j));
  return static_cast<std::size_t>(sample_poisson(cell_dt_ * cell_dtheta_, stream));
}

void DrivingMeasure::append_cell(CellIndex cell, std::vector<Atom>& out) const {
  CounterStream stream(seed_, StreamDomain::MeasureCell, static_cast<std::uint64_t>(cell.i),
                       static_cast<std::uint32_t>(cell.j));
  const auto n = sample_poisson(cell_dt_ * cell_dtheta_, stream);
  const double t0 = static_cast<double>(cell.i) * cell_dt_;
  const double th0 = static_cast<double>(cell.j) * cell_dtheta_;
  const auto first = out.size();
  for (std::uint64_t k = 0; k < n; ++k) {
    const double t = t0 + stream.uniform() * cell_dt_;
    const double theta = th0 + stream.uniform() * cell_dtheta_;
    out.push_back({t, theta});
  }
  std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(), atom_before);
}

std::vector<Atom> DrivingMeasure::cell_atoms(CellIndex cell) const {
  std::vector<Atom> out;
  append_cell(cell, out);
  return out;
}

std::vector<Atom> DrivingMeasure::atoms_in(double t_lo, double t_hi, double theta_hi) const {
  std::vector<Atom> out;
  if (!(t_lo < t_hi) || theta_hi < 0.0) return out;
  const auto i_lo = time_cell(t_lo);
  const auto i_hi = time_cell(t_hi);
  const auto strips = strips_for(theta_hi);
  std::vector<Atom> buf;
  for (auto i = i_lo; i <= i_hi; ++i) {
    for (std::int64_t j = 0; j < strips; ++j) {
      buf.clear();
      append_cell({i, j}, buf);
      for (const auto& a : buf) {
        if (a.t >= t_lo && a.t < t_hi && a.theta <= theta_hi) out.push_back(a);
      }
    }
  }
  std::sort(out.begin(), out.end(), atom_before);
  return out;
}

Configuration Configuration::shifted(const Atom& atom) const {
  if (!(atom.theta >= 0.0)) throw std::invalid_argument("shift: theta must be >= 0");
  Configuration out = *this;
  auto it = std::lower_bound(out.added_.begin(), out.added_.end(), atom, atom_before);
  if (it == out.added_.end() || !(*it == atom)) out.added_.insert(it, atom);
  return out;
}

std::vector<Atom> Configuration::atoms_in(double t_lo, double t_hi, double theta_hi) const {
  auto out = measure_.atoms_in(t_lo, t_hi, theta_hi);
  if (!(t_lo < t_hi) || theta_hi < 0.0) return out;
  for (const auto& a : added_) {
    if (a.t >= t_lo && a.t < t_hi && a.theta <= theta_hi) out.push_back(a);
  }
  std::sort(out.begin(), out.end(), atom_before);
  return out;
}

void Configuration::append_added_in_cell(CellIndex cell, std::vector<Atom>& out) const {
  for (const auto& a : added_) {
    if (measure_.time_cell(a.t) != cell.i) continue;
    const auto j = static_cast<std::int64_t>(std::floor(a.theta / measure_.cell_dtheta()));
    if (j == cell.j) out.push_back(a);
  }
}

Configuration shift(const Configuration& config, const Atom& atom) { return config.shifted(atom); }

std::vector<Atom> atoms_in(const Configuration& config, double t_lo, double t_hi,
                           double theta_hi) {
  return config.atoms_in(t_lo, t_hi, theta_hi);
}

PredictableIntegrand step_integrand(std::vector<StepRectangle> rectangles) {
  double ceiling = 0.0;
  for (const auto& r : rectangles) {
    if (!(r.t_lo <= r.t_hi) || !(r.theta_lo <= r.theta_hi) || r.theta_lo < 0.0) {
      throw std::invalid_argument("step_integrand: malformed rectangle");
    }
    ceiling = std::max(ceiling, r.theta_hi);
  }
  PredictableIntegrand u;
  u.mark_ceiling = ceiling;
  u.value = [rectangles](const Atom& a) {
    double v = 0.0;
    for (const auto& r : rectangles) {
      if (a.t >= r.t_lo && a.t < r.t_hi && a.theta >= r.theta_lo && a.theta < r.theta_hi) {
        v += r.value;
      }
    }
    return v;
  };
  u.integral = [rectangles](double horizon) {
    double s = 0.0;
    for (const auto& r : rectangles) {
      const double lo = std::max(r.t_lo, 0.0);
      const double hi = std::min(r.t_hi, horizon);
      if (hi > lo) s += r.value * (hi - lo) * (r.theta_hi - r.theta_lo);
    }
    return s;
  };
  return u;
}

double divergence(const Configuration& config, const PredictableIntegrand& u, double horizon) {
  if (!u.mark_ceiling || !std::isfinite(*u.mark_ceiling)) {
    throw std::invalid_argument("divergence: integrand must declare a finite mark ceiling");
  }
  if (!u.value || !u.integral) throw std::invalid_argument("divergence: incomplete integrand");
  double sum = 0.0;
  for (const auto& a : config.atoms_in(0.0, horizon, *u.mark_ceiling)) sum += u.value(a);
  return sum - u.integral(horizon);
}

}  // namespace hawkes_stein
