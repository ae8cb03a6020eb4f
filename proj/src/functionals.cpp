#include "hawkes_stein/functionals.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "hawkes_stein/parallel.hpp"
#include "hawkes_stein/philox.hpp"

namespace hawkes_stein {

namespace {

double positive_floor_or_throw(const EventPath& path) {
  const double floor = path.dynamics().positivity_floor();
  if (!(floor > 0.0)) {
    throw std::invalid_argument("self-normalization needs a certified positive intensity floor");
  }
  return floor;
}

double checked_intensity(const EventPath& path, double t, double floor) {
  const double lam = path.intensity(t);
  if (!(lam >= floor * (1.0 - 1e-12))) throw std::runtime_error("intensity below the positivity floor");
  return lam;
}

// int_a^b g(lambda_base(s), lambda_shift(s)) ds split at the events of both paths.
template <class G>
double integrate_pair(const EventPath& base, const EventPath& shifted, double a, double b, G g) {
  std::vector<double> cuts{a, b};
  for (const auto* p : {&base, &shifted}) {
    for (auto k = p->events_before(a); k < p->events().size(); ++k) {
      const double t = p->events()[k].t;
      if (t >= b) break;
      if (t > a) cuts.push_back(t);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    if (!(cuts[k + 1] > cuts[k])) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double s) { return g(base.intensity(s), shifted.intensity(s)); }, cuts[k], cuts[k + 1], 8, 1e-9);
  }
  return total;
}

struct Moments {
  double mean = 0.0, se = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------- samples

double FunctionalSample::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double FunctionalSample::variance() const {
  if (values.size() < 2) return 0.0;
  const double m = mean();
  double ss = 0.0;
  for (double x : values) ss += (x - m) * (x - m);
  return ss / static_cast<double>(values.size() - 1);
}

double FunctionalSample::standard_error() const {
  if (values.size() < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(values.size()));
}

double FunctionalSample::variance_standard_error() const {
  const auto n = static_cast<double>(values.size());
  if (n < 4) return 0.0;
  const double m = mean();
  double m2 = 0.0, m4 = 0.0;
  for (double x : values) {
    const double d2 = (x - m) * (x - m);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(0.0, (m4 - (n - 3.0) / (n - 1.0) * m2 * m2) / n));
}

// ---------------------------------------------------------------- functionals

double functional_standard(const EventPath& path) {
  const double T = path.horizon();
  return (static_cast<double>(path.count()) - compensator(path)) / std::sqrt(T);
}

double functional_reduced(const EventPath& path) {
  const double floor = positive_floor_or_throw(path);
  const double T = path.horizon();
  double sum = 0.0;
  const auto& ev = path.events();
  for (auto k = path.events_before(0.0); k < ev.size() && ev[k].t < T; ++k) {
    sum += 1.0 / std::sqrt(T * checked_intensity(path, ev[k].t, floor));
  }
  return sum - integral_sqrt_intensity(path) / std::sqrt(T);
}

double functional_nearly(const CurvePath& path, const GridFunction& curve) {
  if (!path.curve || (path.curve.get() != &curve &&
                      (path.curve->dt != curve.dt || path.curve->values != curve.values))) {
    throw std::invalid_argument("functional_nearly: the path was thinned against a different curve");
  }
  const double T = path.horizon;
  if (curve.horizon() + 1e-9 * T < T) throw std::invalid_argument("functional_nearly: curve shorter than horizon");
  double sum = 0.0;
  for (const auto& a : path.events) sum += 1.0 / std::sqrt(T * curve(a.t));
  double root = 0.0;
  for (std::size_t k = 0; k + 1 < curve.size(); ++k) {
    const double a = static_cast<double>(k) * curve.dt;
    if (a >= T) break;
    const double b = std::min(a + curve.dt, T);
    const double s0 = std::sqrt(curve.values[k]);
    const double s1 = std::sqrt(curve(b));
    if (s0 + s1 > 0.0) root += (b - a) * 2.0 / 3.0 * (s0 * s0 + s0 * s1 + s1 * s1) / (s0 + s1);
  }
  return sum - root / std::sqrt(T);
}

double functional_discrete(const DiscretePath& path, DiscreteMode mode, const Discrete& spec) {
  const auto n = static_cast<double>(path.counts.size());
  if (n == 0) return 0.0;
  const double H = static_cast<double>(path.total());
  if (mode == DiscreteMode::Martingale) {
    const double comp = std::accumulate(path.intensities.begin(), path.intensities.end(), 0.0);
    return (H - comp) / std::sqrt(n);
  }
  const double varsigma2 = spec.alpha0 / (1.0 - spec.alphas.total());
  return (H - n * varsigma2) / std::sqrt(n);
}

double discrete_residual(const DiscretePath& path, const Discrete& spec) {
  const auto n = static_cast<double>(path.counts.size());
  const double H = static_cast<double>(path.total());
  const double comp = std::accumulate(path.intensities.begin(), path.intensities.end(), 0.0);
  return (H - comp) - (1.0 - spec.alphas.total()) * H + n * spec.alpha0;
}

double evaluate(const EventPath& path, FunctionalTag tag) {
  return tag == FunctionalTag::Standard ? functional_standard(path) : functional_reduced(path);
}

double malliavin_derivative(const ModelSpec& spec, const Configuration& config, double horizon, double shift_t,
                            FunctionalTag target) {
  if (shift_t < 0.0) throw std::invalid_argument("malliavin_derivative: shift time must be >= 0");
  if (shift_t >= horizon) return 0.0;
  const auto paths = simulate_coupled(spec, config, horizon, {shift_t, 0.0});
  return evaluate(paths.shifted, target) - evaluate(paths.base, target);
}

// ---------------------------------------------------------------- bound terms

double BoundTerms::total_part2() const {
  double s = 0.0;
  for (const auto& t : part2) s += t.mean;
  return s;
}

double BoundTerms::total_part3() const {
  double s = 0.0;
  for (const auto& t : part3) {
    if (std::isfinite(t.mean)) s += t.mean;
  }
  return s;
}

BoundTerms bound_terms(const ModelSpec& spec, double horizon, std::size_t reps, Normalization normalization,
                       const BoundOptions& options) {
  if (normalization == Normalization::DeterministicG) {
    throw std::invalid_argument("bound_terms: only UnitG and SelfG normalizations are supported");
  }
  if (options.t_subsample < 1) throw std::invalid_argument("bound_terms: t_subsample must be >= 1");
  if (reps < 2) throw std::invalid_argument("bound_terms: need at least 2 replications");
  const DerivedConstants dc = derived_constants(spec, normalization);
  double sigma2 = options.sigma2;
  if (!(sigma2 > 0.0)) {
    if (!dc.sigma2_target) throw std::invalid_argument("bound_terms: sigma2 has no closed form; pass it explicitly");
    sigma2 = *dc.sigma2_target;
  }
  const bool self = normalization == Normalization::SelfG;
  const double rate_bound = dc.stationary_mean_bound.value_or(1.0);
  BoundTerms out;
  out.normalization = normalization;
  out.horizon = horizon;
  out.reps = reps;
  out.expected_events = static_cast<double>(reps) * (1.0 + (self ? static_cast<double>(options.t_subsample) : 0.0)) *
                        horizon * rate_bound;
  if (out.expected_events > options.max_events) {
    throw BudgetExceeded("bound_terms: nested simulation cost " + std::to_string(out.expected_events) +
                         " events exceeds the budget");
  }
  const double T = horizon;
  const double rT = std::sqrt(T);
  const std::size_t K = options.t_subsample;

  constexpr std::size_t kSelfTerms = 8;
  const auto per_rep = parallel_map<std::vector<double>>(reps, [&](std::size_t r) {
    const Configuration config(DrivingMeasure(derive_seed(options.seed, 0, r)));
    const EventPath base = simulate(spec, config, T);
    if (!self) {
      const double comp = compensator(base);
      return std::vector<double>{std::abs(sigma2 - comp / T), comp / (T * rT)};
    }
    const double floor = positive_floor_or_throw(base);
    std::vector<double> v(kSelfTerms, 0.0);
    v[0] = integral_inv_sqrt_intensity(base) / (T * rT);
    const double F = functional_reduced(base);
    CounterStream times(options.seed, StreamDomain::ShiftTimes, r, 0);
    std::vector<double> t(K), lam_t(K), delta(K);
    std::vector<EventPath> shifted;
    shifted.reserve(K);
    double s3 = 0.0, s4 = 0.0, s5 = 0.0, q2 = 0.0, q4 = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      t[k] = times.uniform() * T;
      lam_t[k] = checked_intensity(base, t[k], floor);
      shifted.push_back(simulate_resumed(base, config.shifted({t[k], 0.0}), t[k]));
      const EventPath& sh = shifted.back();
      auto D = [&](double lb, double ls) { return (1.0 / std::sqrt(ls) - 1.0 / std::sqrt(lb)) / rT; };
      double jumps = 0.0;
      const auto& ev = base.events();
      for (auto i = base.events_before(t[k]); i < ev.size() && ev[i].t < T; ++i) {
        if (ev[i].t <= t[k]) continue;
        jumps += D(base.intensity(ev[i].t), sh.intensity(ev[i].t));
      }
      const double drift = integrate_pair(base, sh, t[k], T, [&](double lb, double ls) { return lb * D(lb, ls); });
      delta[k] = jumps - drift;
      const double root = std::sqrt(lam_t[k]);
      s3 += root * std::abs(delta[k]);
      s4 += root * delta[k] * delta[k];
      s5 += std::abs(delta[k]);
      q2 += root * integrate_pair(base, sh, t[k], T,
                                  [&](double lb, double ls) { return std::sqrt(lb) * std::abs(D(lb, ls)); });
      q4 += root * integrate_pair(base, sh, t[k], T, [&](double lb, double ls) { return std::sqrt(lb) * D(lb, ls); });
    }
    const double Kd = static_cast<double>(K);
    v[1] = T / rT * s3 / Kd;
    v[2] = T / rT * s4 / Kd;
    v[3] = 2.0 * s5 / Kd;
    v[4] = F * F * F;
    v[5] = q2 / Kd;
    double pair = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        if (i == j || !(t[i] < t[j])) continue;
        const double lb = base.intensity(t[j]);
        const double ls = shifted[i].intensity(t[j]);
        const double Dij = (1.0 / std::sqrt(ls) - 1.0 / std::sqrt(lb)) / rT;
        pair += std::sqrt(lam_t[i]) * lb * std::abs(delta[j] * Dij);
      }
    }
    v[6] = K > 1 ? T * T / rT * pair / (Kd * (Kd - 1.0)) : std::numeric_limits<double>::quiet_NaN();
    v[7] = -2.0 * q4 / Kd;
    return v;
  });

  auto column = [&](std::size_t c) {
    std::vector<double> col(reps);
    for (std::size_t r = 0; r < reps; ++r) col[r] = per_rep[r][c];
    return moments(col);
  };
  auto term = [&](const char* name, std::size_t c) {
    const auto m = column(c);
    return TermEstimate{name, m.mean, m.se, false};
  };
  auto zero = [](const char* name) { return TermEstimate{name, 0.0, 0.0, true}; };

  if (!self) {
    out.part2 = {term("variance_gap", 0), term("third_order", 1), zero("divergence_abs"), zero("divergence_sq"),
                 zero("divergence_weighted")};
    return out;
  }
  out.part2 = {zero("variance_gap"), term("third_order", 0), term("divergence_abs", 1), term("divergence_sq", 2),
               term("divergence_weighted", 3)};
  out.part3 = {term("third_moment", 4), term("derivative_pair", 5), term("divergence_pair", 6),
               term("signed_correction", 7)};
  return out;
}

}  // namespace hawkes_stein
