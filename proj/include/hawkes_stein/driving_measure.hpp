#pragma once

// Unit-intensity Poisson random measure on R x R_+, materialized lazily cell by
// cell. A cell is the rectangle [i*dt, (i+1)*dt) x [j*dtheta, (j+1)*dtheta);
// its atoms are a pure function of (seed, i, j).

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace hawkes_stein {

struct Atom {
  double t = 0.0;
  double theta = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

// Strict (t, theta) order used everywhere atoms are sorted.
inline bool atom_before(const Atom& a, const Atom& b) {
  return a.t < b.t || (a.t == b.t && a.theta < b.theta);
}

struct CellIndex {
  std::int64_t i = 0;  // time cell, may be negative
  std::int64_t j = 0;  // mark strip, j >= 0

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

class DrivingMeasure {
 public:
  explicit DrivingMeasure(std::uint64_t seed, double cell_dt = 1.0, double cell_dtheta = 1.0);

  std::uint64_t seed() const { return seed_; }
  double cell_dt() const { return cell_dt_; }
  double cell_dtheta() const { return cell_dtheta_; }

  std::int64_t time_cell(double t) const;
  // Number of strips needed to cover marks in [0, theta_hi].
  std::int64_t strips_for(double theta_hi) const;

  // Atoms of one cell, appended in increasing time order.
  void append_cell(CellIndex cell, std::vector<Atom>& out) const;
  std::vector<Atom> cell_atoms(CellIndex cell) const;
  std::size_t cell_count(CellIndex cell) const;

  // Atoms in [t_lo, t_hi) x [0, theta_hi], sorted by (t, theta).
  std::vector<Atom> atoms_in(double t_lo, double t_hi, double theta_hi) const;

 private:
  std::uint64_t seed_;
  double cell_dt_;
  double cell_dtheta_;
};

// A realization omega: the lazily generated measure plus atoms added by the
// shift operator.
class Configuration {
 public:
  explicit Configuration(DrivingMeasure measure) : measure_(measure) {}

  const DrivingMeasure& measure() const { return measure_; }
  // Added atoms in (t, theta) order, without duplicates.
  const std::vector<Atom>& added_atoms() const { return added_; }

  Configuration shifted(const Atom& atom) const;

  std::vector<Atom> atoms_in(double t_lo, double t_hi, double theta_hi) const;

  // Added atoms lying in cell `cell`.
  void append_added_in_cell(CellIndex cell, std::vector<Atom>& out) const;

  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.measure_.seed() == b.measure_.seed() &&
           a.measure_.cell_dt() == b.measure_.cell_dt() &&
           a.measure_.cell_dtheta() == b.measure_.cell_dtheta() && a.added_ == b.added_;
  }

 private:
  DrivingMeasure measure_;
  std::vector<Atom> added_;
};

// The shift operator epsilon^+_{(t,theta)}.
Configuration shift(const Configuration& config, const Atom& atom);

std::vector<Atom> atoms_in(const Configuration& config, double t_lo, double t_hi,
                           double theta_hi);

// A predictable integrand u(t, theta) on [0, T] x R_+ that vanishes above a
// declared mark ceiling and whose Lebesgue integral is available.
struct PredictableIntegrand {
  std::function<double(const Atom&)> value;
  std::optional<double> mark_ceiling;
  std::function<double(double horizon)> integral;  // int_0^T int u dtheta dt
};

struct StepRectangle {
  double t_lo, t_hi, theta_lo, theta_hi, value;
};

// Deterministic step integrand: sum of value * 1_{rectangle}.
PredictableIntegrand step_integrand(std::vector<StepRectangle> rectangles);

// delta(u) = sum over atoms in [0, T) of u(atom) - int_0^T int u dtheta dt.
// Throws std::invalid_argument when u has no finite mark ceiling.
double divergence(const Configuration& config, const PredictableIntegrand& u, double horizon);

}  // namespace hawkes_stein
