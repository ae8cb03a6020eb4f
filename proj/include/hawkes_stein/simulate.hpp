#pragma once

// Thinning of the driving measure: an atom (t, theta) is an event iff
// theta <= lambda(t), with lambda computed from earlier events only.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "hawkes_stein/driving_measure.hpp"
#include "hawkes_stein/model.hpp"
#include "hawkes_stein/volterra.hpp"

namespace hawkes_stein {

class CeilingOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SimulationOptions {
  double max_ceiling = 1e6;
  bool verify = false;  // rescan under the final ceilings after the run
};

struct CeilingRecord {
  std::int64_t cell;
  double ceiling;
};

// The intensity of a model variant as a function of the past: with
// x(t) = sum_{t_i < t} phi_eff(t - t_i),
//   lambda(t) = h(base(t) + gain(t) * x(t)).
class Dynamics {
 public:
  Dynamics(const ModelSpec& spec, double horizon);

  double start() const { return start_; }
  double horizon() const { return horizon_; }
  const Kernel& kernel() const { return kernel_; }
  const Link& link() const { return link_; }
  double base(double t) const;
  double gain(double t) const;
  double lambda(double t, double excitation) const { return link_(base(t) + gain(t) * excitation); }
  // Lags beyond this are dropped from excitation sums.
  double cutoff() const { return cutoff_; }
  bool markovian() const { return markovian_; }
  double amplitude() const { return amplitude_; }
  double rate() const { return rate_; }
  bool constant_coefficients() const { return !profiled_; }
  double initial_ceiling() const { return initial_ceiling_; }

  // Upper bound of lambda on [a, b] given excitation bounds over [a, b].
  double lambda_sup(double a, double b, double x_inf, double x_sup) const;
  // Certified positive lower bound of lambda, 0 when none is known.
  double positivity_floor() const;

 private:
  double start_ = 0.0;
  double horizon_ = 0.0;
  Kernel kernel_;
  Link link_;
  double mu_ = 0.0;
  Profile mu_fn_, gamma_fn_;
  bool profiled_ = false;
  double cutoff_ = 0.0;
  bool markovian_ = false;
  double amplitude_ = 0.0, rate_ = 0.0;
  double initial_ceiling_ = 1.0;
};

class EventPath {
 public:
  EventPath(const ModelSpec& spec, Configuration config, double horizon);
  EventPath(std::shared_ptr<const ModelSpec> spec, std::shared_ptr<const Dynamics> dynamics,
            Configuration config);

  const ModelSpec& spec() const { return *spec_; }
  const Configuration& config() const { return config_; }
  const Dynamics& dynamics() const { return *dynamics_; }
  double start() const { return dynamics_->start(); }
  double horizon() const { return dynamics_->horizon(); }
  // Accepted atoms on [start, horizon), increasing in time.
  const std::vector<Atom>& events() const { return events_; }
  const std::vector<CeilingRecord>& ceiling_trace() const { return trace_; }

  // Events in [0, horizon).
  std::size_t count() const;
  // x(t) and lambda(t) from events strictly before t.
  double excitation(double t) const;
  double intensity(double t) const;

  // Index one past the last event strictly before t.
  std::size_t events_before(double t) const;

  // Shared with the simulator.
  void push_event(const Atom& atom, double state_after);
  void push_ceiling(CeilingRecord r) { trace_.push_back(r); }
  void raise_ceiling(std::int64_t cell, double ceiling);
  // Markov state just after event k (exponential kernels only).
  double state_after(std::size_t k) const { return states_[k]; }

 private:
  std::shared_ptr<const ModelSpec> spec_;
  std::shared_ptr<const Dynamics> dynamics_;
  Configuration config_;
  std::vector<Atom> events_;
  std::vector<double> states_;
  std::vector<CeilingRecord> trace_;
};

EventPath simulate(const ModelSpec& spec, const Configuration& config, double horizon,
                   const SimulationOptions& options = {});

// Continues `prefix` from `resume_time` on `config`: events of `prefix` before
// resume_time are kept, the rest is simulated afresh.
EventPath simulate_resumed(const EventPath& prefix, const Configuration& config,
                           double resume_time, const SimulationOptions& options = {});

struct CoupledPaths {
  EventPath base;
  EventPath shifted;
};

// Base path and the path on shift(config, point); point.theta must be 0.
CoupledPaths simulate_coupled(const ModelSpec& spec, const Configuration& config, double horizon,
                              const Atom& point, const SimulationOptions& options = {});

// Number of atoms under the final ceilings whose acceptance disagrees with
// theta <= lambda(t) recomputed from the final event list. Zero for a correct path.
std::size_t verify_complete(const EventPath& path);

enum class Quadrature { Auto, Adaptive };

// int_0^T lambda, int_0^T sqrt(lambda), int_0^T lambda^{-1/2}.
double compensator(const EventPath& path, Quadrature method = Quadrature::Auto);
double integral_sqrt_intensity(const EventPath& path, Quadrature method = Quadrature::Auto);
double integral_inv_sqrt_intensity(const EventPath& path, Quadrature method = Quadrature::Auto);

// Thinning against a deterministic curve f(t) (linear interpolation of the grid).
struct CurvePath {
  std::shared_ptr<const GridFunction> curve;
  double horizon = 0.0;
  std::vector<Atom> events;
};

CurvePath simulate_curve(std::shared_ptr<const GridFunction> curve, const Configuration& config,
                         double horizon, const SimulationOptions& options = {});

struct DiscretePath {
  std::vector<std::uint64_t> counts;  // X_1..X_n
  std::vector<double> intensities;    // lambda_1..lambda_n
  std::uint64_t total() const;
};

DiscretePath simulate_discrete(const Discrete& spec, std::size_t steps, std::uint64_t seed);

}  // namespace hawkes_stein
