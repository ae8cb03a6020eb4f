#pragma once

// Kernels, link functions and the Hawkes model variants.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hawkes_stein {

enum class KernelFamily { Exponential, PowerLaw, CompactPolynomial, Tabulated };

// phi(t) = scale * rate * exp(-rate * t); used for Markovian state recursions.
struct ExponentialForm {
  double amplitude;  // phi(0) = scale * rate
  double rate;
};

// A reproduction kernel phi : R_+ -> R with certified ||phi||_1 and
// m = int t |phi(t)| dt. Every family is sign-definite except tabulated.
class Kernel {
 public:
  Kernel() = default;  // zero kernel
  // scale * rate * e^{-rate t}; ||phi||_1 = |scale|, m = |scale| / rate.
  static Kernel exponential(double scale, double rate);
  // scale * (p - 1) / delta * (1 + t / delta)^{-p}, p > 2.
  static Kernel power_law(double scale, double delta, double exponent);
  // scale * (p + 1) / L * (1 - t / L)^p on [0, L], zero beyond.
  static Kernel compact_polynomial(double scale, double support, double power);
  // Piecewise-linear interpolation of values[k] at k * dt, zero after the last node.
  static Kernel tabulated(double dt, std::vector<double> values);

  double operator()(double t) const;

  KernelFamily family() const { return family_; }
  double l1_norm() const { return l1_norm_; }
  double first_moment() const { return first_moment_; }
  std::optional<double> support() const;
  bool non_negative() const;
  std::optional<ExponentialForm> exponential_form() const;

  // Bounds of phi over [lo, hi] (0 <= lo <= hi).
  double sup_on(double lo, double hi) const;
  double inf_on(double lo, double hi) const;

  // int_a^b phi(t) dt for 0 <= a <= b.
  double integral(double a, double b) const;
  // int_from^inf |phi(t)| dt.
  double tail_l1(double from) const;

  // Beyond this lag |phi| is below `tolerance` * phi's scale; used to truncate sums.
  double effective_support(double tolerance = 1e-17) const;

  Kernel scaled(double factor) const;

  std::string describe() const;

 private:
  KernelFamily family_ = KernelFamily::Exponential;
  double scale_ = 0.0;
  double p1_ = 1.0;  // rate | delta | support | dt
  double p2_ = 0.0;  // exponent | power
  std::vector<double> table_;
  double l1_norm_ = 0.0;
  double first_moment_ = 0.0;
};

enum class LinkFamily { Identity, PositivePart, AffineClipped, Sigmoid, Tabulated };
enum class Monotonicity { NonDecreasing, NonIncreasing, None };

// Piecewise-linear description h(x) = slope * x + intercept on consecutive
// intervals, used to integrate intensities exactly.
struct LinearPiece {
  double x_lo, x_hi, slope, intercept;
};

class Link {
 public:
  Link() = default;  // identity
  static Link identity();
  static Link positive_part();
  // clamp(intercept + slope * x, 0, cap)
  static Link affine_clipped(double intercept, double slope, double cap = HUGE_VAL);
  // scale / (1 + exp(-steepness * x)), Lipschitz scale * steepness / 4.
  static Link sigmoid(double scale, double steepness = 1.0);
  // Piecewise-linear through (x0 + k * dx, values[k]), constant outside.
  static Link tabulated(double x0, double dx, std::vector<double> values);

  double operator()(double x) const;
  double lipschitz() const { return lipschitz_; }
  Monotonicity monotonicity() const { return monotonicity_; }
  LinkFamily family() const { return family_; }
  bool is_identity() const { return family_ == LinkFamily::Identity; }

  // Non-empty when h is piecewise linear.
  std::vector<LinearPiece> linear_pieces() const;

  // Upper bound of h over [lo, hi].
  double sup_on(double lo, double hi) const;

  std::string describe() const;

 private:
  LinkFamily family_ = LinkFamily::Identity;
  double a_ = 0.0, b_ = 1.0, c_ = HUGE_VAL;
  std::vector<double> table_;
  double lipschitz_ = 1.0;
  Monotonicity monotonicity_ = Monotonicity::NonDecreasing;
};

// A function on [0, 1] with a certified bound over sub-intervals.
class Profile {
 public:
  static Profile constant(double value);
  static Profile affine(double intercept, double slope);
  // Opaque callable; bounds use the declared Lipschitz constant.
  static Profile callable(std::function<double(double)> f, double lipschitz);

  double operator()(double x) const;
  double sup_on(double lo, double hi) const;
  double inf_on(double lo, double hi) const;
  double sup() const { return sup_on(0.0, 1.0); }
  double inf() const { return inf_on(0.0, 1.0); }
  bool is_constant() const { return !fn_ && slope_ == 0.0; }

 private:
  double intercept_ = 0.0;
  double slope_ = 0.0;
  std::function<double(double)> fn_;
  double lipschitz_ = 0.0;
};

// Discrete reproduction sequence alpha_1, alpha_2, ...
class DiscreteKernel {
 public:
  static DiscreteKernel finite(std::vector<double> alphas);  // alphas[k-1] = alpha_k
  static DiscreteKernel geometric(double first, double ratio);  // first * ratio^{k-1}
  // first * ratio^{k-1} for k <= terms, zero beyond.
  static DiscreteKernel truncated_geometric(double first, double ratio, int terms);

  double operator()(int k) const;  // k >= 1
  double total() const { return total_; }           // |alpha|
  double first_moment() const { return moment_; }  // sum k alpha_k
  bool is_geometric_tail() const { return geometric_; }
  double first() const { return first_; }
  double ratio() const { return ratio_; }
  const std::vector<double>& values() const { return values_; }
  bool non_negative() const;

 private:
  std::vector<double> values_;
  bool geometric_ = false;
  double first_ = 0.0, ratio_ = 0.0;
  double total_ = 0.0, moment_ = 0.0;
};

struct EmptyHistory {
  double mu;
  Kernel kernel;
  Link link;
};

struct Stationaryized {
  double mu;
  Kernel kernel;
  Link link;
  double burn_in;
};

struct LocallyStationary {
  Profile mu_fn;
  Profile gamma_fn;
  Kernel kernel;
};

struct Discrete {
  double alpha0;
  DiscreteKernel alphas;
};

struct NearlyUnstable {
  double mu;
  Kernel kernel;  // ||phi||_1 = 1
  double horizon_T;
  double a_T() const { return 1.0 - 1.0 / horizon_T; }
};

using ModelSpec = std::variant<EmptyHistory, Stationaryized, LocallyStationary, Discrete, NearlyUnstable>;

std::string variant_name(const ModelSpec& spec);

struct Violation {
  std::string condition;
  double value;
  std::string message;
};

std::vector<Violation> validate(const ModelSpec& spec);

// Smallest burn-in B with alpha * int_B^inf |phi| < tolerance.
double default_burn_in(const Kernel& kernel, const Link& link, double tolerance = 1e-6);

enum class Normalization { UnitG, SelfG, DeterministicG };

struct DerivedConstants {
  std::optional<double> sigma2_target;      // nullopt: estimate by long-run simulation
  std::optional<double> raw_count_variance;  // discrete raw-count functional only
  double branching_ratio = 0.0;
  std::optional<double> stationary_mean_bound;
  bool estimate_by_simulation = false;
};

// Throws std::invalid_argument on an invalid spec.
DerivedConstants derived_constants(const ModelSpec& spec,
                                   Normalization normalization = Normalization::UnitG);

}  // namespace hawkes_stein
