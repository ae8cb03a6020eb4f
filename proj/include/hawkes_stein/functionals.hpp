#pragma once

// Normalized compensated functionals and the pathwise Malliavin quantities
// entering the Wasserstein bounds.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawkes_stein/driving_measure.hpp"
#include "hawkes_stein/model.hpp"
#include "hawkes_stein/simulate.hpp"
#include "hawkes_stein/volterra.hpp"

namespace hawkes_stein {

struct FunctionalSample {
  std::vector<double> values;
  double sigma2_target = 1.0;
  double horizon = 0.0;
  std::string meta;

  double mean() const;
  double variance() const;  // unbiased
  double standard_error() const;  // of the mean
  // SE of the unbiased variance estimate.
  double variance_standard_error() const;
};

// (H_T - int_0^T lambda) / sqrt(T).
double functional_standard(const EventPath& path);

// sum_events (T lambda(t_i))^{-1/2} - T^{-1/2} int_0^T sqrt(lambda).
// Throws std::invalid_argument when the spec has no positive intensity floor.
double functional_reduced(const EventPath& path);

// Compensated curve functional; `curve` must be the one the path was thinned against.
double functional_nearly(const CurvePath& path, const GridFunction& curve);

enum class DiscreteMode { Martingale, RawCount };

double functional_discrete(const DiscretePath& path, DiscreteMode mode, const Discrete& spec);

// sqrt(n) F^n - (1 - |alpha|) H_n + n alpha_0.
double discrete_residual(const DiscretePath& path, const Discrete& spec);

enum class FunctionalTag { Standard, Reduced };

double evaluate(const EventPath& path, FunctionalTag tag);

// F(shift(config, (shift_t, 0))) - F(config).
double malliavin_derivative(const ModelSpec& spec, const Configuration& config, double horizon,
                            double shift_t, FunctionalTag target);

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TermEstimate {
  std::string name;
  double mean = 0.0;
  double se = 0.0;
  bool exact_zero = false;
};

struct BoundTerms {
  Normalization normalization = Normalization::UnitG;
  double horizon = 0.0;
  std::size_t reps = 0;
  std::vector<TermEstimate> part2;  // five terms
  std::vector<TermEstimate> part3;  // SelfG only, four terms, last one signed
  double expected_events = 0.0;     // cost reported before running
  double total_part2() const;
  double total_part3() const;
};

struct BoundOptions {
  std::size_t t_subsample = 32;
  std::uint64_t seed = 1;
  double max_events = 5e9;  // refuse to start above this nested simulation cost
  double sigma2 = 0.0;      // 0: use derived_constants
};

BoundTerms bound_terms(const ModelSpec& spec, double horizon, std::size_t reps, Normalization normalization,
                       const BoundOptions& options = {});

}  // namespace hawkes_stein
