#pragma once

// Experiment configuration and the pipeline spec -> simulate -> functional -> W1.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawkes_stein/functionals.hpp"
#include "hawkes_stein/model.hpp"
#include "hawkes_stein/wasserstein.hpp"

namespace hawkes_stein {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ModelViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A named family with numeric parameters, e.g. {"family": "exponential", "scale": 0.5, "rate": 1}.
struct FamilyConfig {
  std::string family;
  std::map<std::string, double> params;
  std::vector<double> values;  // tabulated families only
};

struct ProfileConfig {
  double intercept = 0.0;
  double slope = 0.0;
};

struct ModelConfig {
  std::string variant = "empty_history";
  double mu = 1.0;
  std::optional<double> burn_in;
  FamilyConfig kernel{"exponential", {{"scale", 0.5}, {"rate", 1.0}}, {}};
  FamilyConfig link{"identity", {}, {}};
  ProfileConfig mu_fn{1.0, 0.0};
  ProfileConfig gamma_fn{0.5, 0.0};
  double alpha0 = 1.0;
  FamilyConfig alphas{"geometric", {{"first", 0.3}, {"ratio", 0.5}}, {}};
  double max_horizon = 512.0;
};

struct ResolventConfig {
  double alpha = 1.0;
  double horizon = 10.0;
  double dt = 1e-3;
};

struct BoundConfig {
  std::size_t reps = 200;
  std::size_t t_subsample = 32;
};

struct ExperimentConfig {
  ModelConfig model;
  std::vector<double> horizons{50.0, 100.0, 200.0};
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  Normalization normalization = Normalization::UnitG;
  DiscreteMode discrete_mode = DiscreteMode::Martingale;
  std::optional<double> sigma2;
  std::size_t bootstrap = 200;
  double curve_dt = 0.01;
  std::string output_dir = "out";
  int threads = 0;
  double budget = 0.0;  // seconds, 0 = unlimited
  ResolventConfig resolvent;
  std::optional<BoundConfig> bound;
};

// Throws ConfigError on malformed input or unknown keys.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

// FNV-1a 64 of the canonical JSON dump.
std::uint64_t config_hash(const ExperimentConfig& c);

Kernel build_kernel(const FamilyConfig& k);
Link build_link(const FamilyConfig& l);
DiscreteKernel build_alphas(const FamilyConfig& a);

// Throws ConfigError on bad parameters and ModelViolation when validate() objects.
// `horizon` sets T for the nearly unstable variant.
ModelSpec build_model(const ModelConfig& m, double horizon);

// Wall-clock budget shared by the stages of one run.
class Deadline {
 public:
  explicit Deadline(double seconds);
  bool expired() const;
  void check() const;  // throws BudgetExceeded

 private:
  double seconds_;
  std::chrono::steady_clock::time_point start_;
};

// One replication of the configured functional at horizon index h.
using Replication = std::function<double(std::size_t h, std::size_t rep)>;

struct Pipeline {
  Replication replicate;
  std::optional<double> sigma2;  // nullopt: estimate from the largest horizon
  std::string functional;
};

Pipeline make_pipeline(const ExperimentConfig& c);

struct HorizonSummary {
  double horizon = 0.0;
  FunctionalSample sample;
  double dw = 0.0;
  double se = 0.0;
  double floor = 0.0;
};

struct SweepResult {
  std::vector<HorizonSummary> horizons;
  std::optional<RateFit> fit;
  double sigma2 = 1.0;
  bool sigma2_estimated = false;
  bool partial = false;
  // Floor at least 4x below the smallest estimate.
  bool floor_ok() const;
};

struct SweepOptions {
  std::vector<double> horizons;
  std::size_t reps = 1000;
  std::size_t bootstrap = 200;
  std::uint64_t bootstrap_seed = 1;
  int threads = 0;
  const Deadline* deadline = nullptr;
};

SweepResult run_sweep(const Pipeline& pipeline, const SweepOptions& options);

// Point estimates strictly decrease and the first-to-last drop exceeds
// `k` combined standard errors.
bool decreasing_beyond(const SweepResult& r, double k = 2.0);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Reference specs.
ModelSpec linear_reference();      // mu = 1, phi = 0.5 e^{-t}, h = identity
ModelSpec inhibition_reference();  // mu = 1, phi = -0.5 e^{-t}, h = positive part

CheckResult check_divergence_isometry(std::uint64_t seed, std::size_t reps, int threads = 0);
CheckResult check_reduced_variance(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t reps,
                                   int threads = 0);
CheckResult check_third_moment(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t reps,
                               int threads = 0);
CheckResult check_malliavin_domination(const ModelSpec& spec, const std::vector<double>& lags, std::uint64_t seed,
                                       std::size_t reps, int threads = 0);
CheckResult check_comparison(double mu, const Kernel& kernel, const Link& link, double horizon, std::uint64_t seed,
                             std::size_t paths, int threads = 0);
CheckResult check_martingale(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t reps,
                             int threads = 0);
CheckResult check_resolvent_closed_form();
CheckResult check_nearly_unstable_curve();
CheckResult check_completeness(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t paths);

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed, std::size_t reps, int threads = 0);

std::string format_double(double x);  // %.17g

}  // namespace hawkes_stein
