#include "hawkes_stein/simulate.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <type_traits>

#include "hawkes_stein/philox.hpp"
#include "hawkes_stein/poisson_sampler.hpp"

namespace hawkes_stein {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_valid(const ModelSpec& spec) {
  const auto v = validate(spec);
  if (!v.empty()) throw std::invalid_argument("invalid model: " + v.front().message);
}

std::int64_t strips_covering(double ceiling, double dtheta) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(ceiling / dtheta)));
}

double next_ceiling(double initial, double bound, double max_ceiling) {
  if (!(bound <= max_ceiling)) throw CeilingOverflow("intensity bound exceeds the maximum mark ceiling");
  double c = initial;
  while (c < bound) c *= 2.0;
  if (c > max_ceiling) throw CeilingOverflow("mark ceiling exceeds the maximum");
  return c;
}

// Atoms of one time cell, materialized strip by strip.
class CellBuffer {
 public:
  CellBuffer(const Configuration& config, std::int64_t cell) : config_(config), cell_(cell) {}

  void cover(double ceiling) {
    const auto need = strips_covering(ceiling, config_.measure().cell_dtheta());
    if (need <= strips_) return;
    for (auto j = strips_; j < need; ++j) {
      config_.measure().append_cell({cell_, j}, atoms_);
      config_.append_added_in_cell({cell_, j}, atoms_);
    }
    strips_ = need;
    std::sort(atoms_.begin(), atoms_.end(), atom_before);
  }

  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  const Configuration& config_;
  std::int64_t cell_;
  std::int64_t strips_ = 0;
  std::vector<Atom> atoms_;
};

// Excitation bookkeeping during a run.
class LiveState {
 public:
  explicit LiveState(const EventPath& path) : path_(path), d_(path.dynamics()) {
    const auto& ev = path.events();
    if (!ev.empty() && d_.markovian()) {
      last_t_ = ev.back().t;
      state_ = path.state_after(ev.size() - 1);
    }
  }

  double excitation(double t) {
    const auto& ev = path_.events();
    if (d_.markovian()) return ev.empty() ? 0.0 : state_ * std::exp(-d_.rate() * (t - last_t_));
    advance(t);
    double x = 0.0;
    for (auto i = live_; i < ev.size(); ++i) {
      const double lag = t - ev[i].t;
      if (lag <= d_.cutoff()) x += d_.kernel()(lag);
    }
    return x;
  }

  // Bounds of x on [a, b] assuming no event in (a, b].
  std::pair<double, double> range(double a, double b) {
    const auto& ev = path_.events();
    if (d_.markovian()) {
      if (ev.empty()) return {0.0, 0.0};
      const double xa = state_ * std::exp(-d_.rate() * (a - last_t_));
      const double xb = state_ * std::exp(-d_.rate() * (b - last_t_));
      return {std::min(xa, xb), std::max(xa, xb)};
    }
    advance(a);
    double lo = 0.0, hi = 0.0;
    for (auto i = live_; i < ev.size(); ++i) {
      const double l0 = a - ev[i].t, l1 = b - ev[i].t;
      if (l0 > d_.cutoff()) continue;
      if (l1 > d_.cutoff()) {
        lo += std::min(d_.kernel().inf_on(l0, d_.cutoff()), 0.0);
        hi += std::max(d_.kernel().sup_on(l0, d_.cutoff()), 0.0);
      } else {
        lo += d_.kernel().inf_on(l0, l1);
        hi += d_.kernel().sup_on(l0, l1);
      }
    }
    return {lo, hi};
  }

  // State after an event at t, given x(t-) = x_before.
  double jump(double t, double x_before) {
    if (!d_.markovian()) return 0.0;
    state_ = x_before + d_.amplitude();
    last_t_ = t;
    return state_;
  }

 private:
  void advance(double t) {
    const auto& ev = path_.events();
    while (live_ < ev.size() && t - ev[live_].t > d_.cutoff()) ++live_;
  }

  const EventPath& path_;
  const Dynamics& d_;
  std::size_t live_ = 0;
  double state_ = 0.0, last_t_ = 0.0;
};

void run(EventPath& path, double from, const SimulationOptions& options) {
  const Dynamics& d = path.dynamics();
  const Configuration& config = path.config();
  const DrivingMeasure& measure = config.measure();
  const double T = d.horizon();
  if (!(from < T)) return;
  LiveState live(path);
  const auto i0 = measure.time_cell(from);
  const auto i1 = measure.time_cell(T);
  for (auto i = i0; i <= i1; ++i) {
    const double lo = std::max(static_cast<double>(i) * measure.cell_dt(), from);
    const double hi = std::min(static_cast<double>(i + 1) * measure.cell_dt(), T);
    if (!(lo < hi)) continue;
    CellBuffer cell(config, i);
    auto [xl, xh] = live.range(lo, hi);
    double ceiling = next_ceiling(d.initial_ceiling(), d.lambda_sup(lo, hi, xl, xh), options.max_ceiling);
    cell.cover(ceiling);
    const Atom start{lo, -kInf};
    auto idx = static_cast<std::size_t>(
        std::lower_bound(cell.atoms().begin(), cell.atoms().end(), start, atom_before) - cell.atoms().begin());
    while (idx < cell.atoms().size()) {
      const Atom a = cell.atoms()[idx];
      if (a.t >= hi) break;
      ++idx;
      if (a.theta > ceiling) continue;
      const double x = live.excitation(a.t);
      if (!(a.theta <= d.lambda(a.t, x))) continue;
      path.push_event(a, live.jump(a.t, x));
      auto [bl, bh] = live.range(a.t, hi);
      const double bound = d.lambda_sup(a.t, hi, bl, bh);
      if (bound > ceiling) {
        ceiling = next_ceiling(d.initial_ceiling(), bound, options.max_ceiling);
        cell.cover(ceiling);
        idx = static_cast<std::size_t>(
            std::upper_bound(cell.atoms().begin(), cell.atoms().end(), a, atom_before) - cell.atoms().begin());
      }
    }
    path.push_ceiling({i, ceiling});
  }
}

// One G7-K15 panel on [a, b]; returns the Kronrod value and |K - G|.
template <class F>
std::pair<double, double> kronrod_panel(F& f, double a, double b) {
  using K15 = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G7 = boost::math::quadrature::gauss<double, 7>;
  const auto& x = K15::abscissa();
  const auto& wk = K15::weights();
  const auto& wg = G7::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double f0 = f(c);
  double k = wk[0] * f0, g = wg[0] * f0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double s = f(c - h * x[i]) + f(c + h * x[i]);
    k += wk[i] * s;
    if (i % 2 == 0) g += wg[i / 2] * s;
  }
  return {h * k, h * std::abs(k - g)};
}

template <class F>
double adaptive(F f, double a, double b, int depth = 0) {
  const auto [v, err] = kronrod_panel(f, a, b);
  const bool settled = depth >= 2 && err <= 1e-12 * std::abs(v) + 1e-14 * (b - a);
  if (settled || b - a <= 1e-12 * (1.0 + std::abs(a))) return v;
  if (depth >= 60) throw std::runtime_error("intensity quadrature did not converge");
  const double m = 0.5 * (a + b);
  return adaptive(f, a, m, depth + 1) + adaptive(f, m, b, depth + 1);
}

enum class Transform { Identity, Sqrt, InvSqrt };

double apply(Transform tr, double lam) {
  switch (tr) {
    case Transform::Identity:
      return lam;
    case Transform::Sqrt:
      return std::sqrt(lam);
    case Transform::InvSqrt:
      return 1.0 / std::sqrt(lam);
  }
  return lam;
}

// int_0^L h(c + S e^{-r u}) du for piecewise-linear h.
double piecewise_linear_exp(const std::vector<LinearPiece>& pieces, double c, double S, double r, double L) {
  std::vector<double> cuts{0.0, L};
  if (S != 0.0) {
    for (const auto& p : pieces) {
      if (!std::isfinite(p.x_lo)) continue;
      const double ratio = (p.x_lo - c) / S;
      if (ratio > 0.0 && ratio < 1.0) {
        const double tau = -std::log(ratio) / r;
        if (tau > 0.0 && tau < L) cuts.push_back(tau);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double u0 = cuts[k], u1 = cuts[k + 1];
    if (!(u1 > u0)) continue;
    const double mid = c + S * std::exp(-r * 0.5 * (u0 + u1));
    const auto it = std::find_if(pieces.begin(), pieces.end(),
                                 [&](const LinearPiece& p) { return mid >= p.x_lo && mid <= p.x_hi; });
    if (it == pieces.end()) throw std::logic_error("link pieces do not cover the real line");
    s += (it->slope * c + it->intercept) * (u1 - u0) +
         it->slope * S * (std::exp(-r * u0) - std::exp(-r * u1)) / r;
  }
  return s;
}

double closed_form_sqrt(Transform tr, double c, double S, double r, double L) {
  const double sc = std::sqrt(c);
  const double y0 = std::sqrt(c + S);
  const double y1 = std::sqrt(c + S * std::exp(-r * L));
  const double dy = S * std::expm1(-r * L) / (y0 + y1);
  const double log_ratio = std::log1p(dy / (y0 + sc));
  if (tr == Transform::Sqrt) return sc * L - 2.0 / r * dy + 2.0 * sc / r * log_ratio;
  return L / sc + 2.0 / (r * sc) * log_ratio;
}

double integrate_path(const EventPath& path, Transform tr, Quadrature method) {
  const Dynamics& d = path.dynamics();
  const auto& ev = path.events();
  const double T = path.horizon();
  const bool pl_exact = d.markovian() && d.constant_coefficients() && !d.link().linear_pieces().empty();
  const auto pieces = pl_exact ? d.link().linear_pieces() : std::vector<LinearPiece>{};
  const double c = d.base(0.0);

  auto segment = [&](double a, double b, std::size_t k) {
    if (!(b > a)) return 0.0;
    if (d.markovian()) {
      const double S = k == 0 ? 0.0 : path.state_after(k - 1) * std::exp(-d.rate() * (a - ev[k - 1].t));
      if (method == Quadrature::Auto && d.constant_coefficients()) {
        if (tr == Transform::Identity && pl_exact) return piecewise_linear_exp(pieces, c, S, d.rate(), b - a);
        if (tr != Transform::Identity && d.link().is_identity() && c > 0.0 && S >= 0.0) {
          return closed_form_sqrt(tr, c, S, d.rate(), b - a);
        }
      }
      return adaptive([&](double u) { return apply(tr, d.lambda(u, S * std::exp(-d.rate() * (u - a)))); }, a, b);
    }
    return adaptive(
        [&](double u) {
          double x = 0.0;
          for (std::size_t i = k; i-- > 0;) {
            const double lag = u - ev[i].t;
            if (lag > d.cutoff()) break;
            x += d.kernel()(lag);
          }
          return apply(tr, d.lambda(u, x));
        },
        a, b);
  };

  std::size_t k = path.events_before(0.0);
  double a = 0.0, total = 0.0;
  for (; k < ev.size() && ev[k].t < T; ++k) {
    total += segment(a, ev[k].t, k);
    a = ev[k].t;
  }
  total += segment(a, T, k);
  return total;
}

}  // namespace

// ---------------------------------------------------------------- Dynamics

Dynamics::Dynamics(const ModelSpec& spec, double horizon) : horizon_(horizon) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, EmptyHistory> || std::is_same_v<M, Stationaryized>) {
          kernel_ = m.kernel;
          link_ = m.link;
          mu_ = m.mu;
          if constexpr (std::is_same_v<M, Stationaryized>) start_ = -m.burn_in;
        } else if constexpr (std::is_same_v<M, LocallyStationary>) {
          kernel_ = m.kernel;
          mu_fn_ = m.mu_fn;
          gamma_fn_ = m.gamma_fn;
          profiled_ = true;
        } else if constexpr (std::is_same_v<M, NearlyUnstable>) {
          kernel_ = m.kernel.scaled(m.a_T());
          mu_ = m.mu;
        } else {
          throw std::invalid_argument("discrete models are simulated with simulate_discrete");
        }
      },
      spec);
  if (const auto e = kernel_.exponential_form()) {
    markovian_ = true;
    amplitude_ = e->amplitude;
    rate_ = e->rate;
    cutoff_ = kInf;
  } else {
    cutoff_ = kernel_.effective_support();
  }
  const double lam0 = profiled_ ? mu_fn_.sup() : link_(mu_);
  initial_ceiling_ = lam0 > 0.0 ? 2.0 * lam0 : 1.0;
}

double Dynamics::base(double t) const { return profiled_ ? mu_fn_(t / horizon_) : mu_; }

double Dynamics::gain(double t) const { return profiled_ ? gamma_fn_(t / horizon_) : 1.0; }

double Dynamics::lambda_sup(double a, double b, double x_inf, double x_sup) const {
  if (!profiled_) return link_.sup_on(mu_ + x_inf, mu_ + x_sup);
  const double u0 = a / horizon_, u1 = b / horizon_;
  const double g_lo = gamma_fn_.inf_on(u0, u1), g_hi = gamma_fn_.sup_on(u0, u1);
  const double eta_hi = mu_fn_.sup_on(u0, u1) + std::max({g_lo * x_sup, g_hi * x_sup, g_lo * x_inf, g_hi * x_inf});
  const double eta_lo = mu_fn_.inf_on(u0, u1) + std::min({g_lo * x_sup, g_hi * x_sup, g_lo * x_inf, g_hi * x_inf});
  return link_.sup_on(eta_lo, eta_hi);
}

double Dynamics::positivity_floor() const {
  if (!kernel_.non_negative()) return 0.0;
  if (profiled_) return std::max(mu_fn_.inf(), 0.0);
  if (link_.monotonicity() != Monotonicity::NonDecreasing) return 0.0;
  return std::max(link_(mu_), 0.0);
}

// ---------------------------------------------------------------- EventPath

EventPath::EventPath(const ModelSpec& spec, Configuration config, double horizon)
    : spec_(std::make_shared<const ModelSpec>(spec)),
      dynamics_(std::make_shared<const Dynamics>(spec, horizon)),
      config_(std::move(config)) {}

EventPath::EventPath(std::shared_ptr<const ModelSpec> spec, std::shared_ptr<const Dynamics> dynamics,
                     Configuration config)
    : spec_(std::move(spec)), dynamics_(std::move(dynamics)), config_(std::move(config)) {}

std::size_t EventPath::count() const {
  return events_before(horizon()) - events_before(0.0);
}

std::size_t EventPath::events_before(double t) const {
  return static_cast<std::size_t>(
      std::lower_bound(events_.begin(), events_.end(), t, [](const Atom& a, double v) { return a.t < v; }) -
      events_.begin());
}

double EventPath::excitation(double t) const {
  const auto k = events_before(t);
  const Dynamics& d = *dynamics_;
  if (d.markovian()) return k == 0 ? 0.0 : states_[k - 1] * std::exp(-d.rate() * (t - events_[k - 1].t));
  double x = 0.0;
  for (auto i = k; i-- > 0;) {
    const double lag = t - events_[i].t;
    if (lag > d.cutoff()) break;
    x += d.kernel()(lag);
  }
  return x;
}

double EventPath::intensity(double t) const { return dynamics_->lambda(t, excitation(t)); }

void EventPath::raise_ceiling(std::int64_t cell, double ceiling) {
  for (auto& r : trace_) {
    if (r.cell == cell) r.ceiling = std::max(r.ceiling, ceiling);
  }
}

void EventPath::push_event(const Atom& atom, double state_after) {
  events_.push_back(atom);
  states_.push_back(state_after);
}

// ---------------------------------------------------------------- simulation

EventPath simulate(const ModelSpec& spec, const Configuration& config, double horizon,
                   const SimulationOptions& options) {
  require_valid(spec);
  EventPath path(spec, config, horizon);
  run(path, path.start(), options);
  if (options.verify && verify_complete(path) != 0) {
    throw std::logic_error("simulate: completeness rescan found a missed or spurious acceptance");
  }
  return path;
}

EventPath simulate_resumed(const EventPath& prefix, const Configuration& config, double resume_time,
                           const SimulationOptions& options) {
  EventPath path(std::make_shared<const ModelSpec>(prefix.spec()),
                 std::make_shared<const Dynamics>(prefix.dynamics()), config);
  const auto k = prefix.events_before(resume_time);
  for (std::size_t i = 0; i < k; ++i) path.push_event(prefix.events()[i], prefix.state_after(i));
  const auto resume_cell = config.measure().time_cell(std::max(resume_time, prefix.start()));
  double carried = 0.0;
  for (const auto& r : prefix.ceiling_trace()) {
    if (r.cell < resume_cell) path.push_ceiling(r);
    if (r.cell == resume_cell) carried = r.ceiling;
  }
  run(path, std::max(resume_time, prefix.start()), options);
  if (carried > 0.0) path.raise_ceiling(resume_cell, carried);
  if (options.verify && verify_complete(path) != 0) {
    throw std::logic_error("simulate_resumed: completeness rescan found a missed or spurious acceptance");
  }
  return path;
}

CoupledPaths simulate_coupled(const ModelSpec& spec, const Configuration& config, double horizon,
                              const Atom& point, const SimulationOptions& options) {
  if (point.theta != 0.0) throw std::invalid_argument("simulate_coupled: shift point must have theta = 0");
  EventPath base = simulate(spec, config, horizon, options);
  EventPath shifted = point.t >= horizon ? base : simulate_resumed(base, config.shifted(point), point.t, options);
  return {std::move(base), std::move(shifted)};
}

std::size_t verify_complete(const EventPath& path) {
  const auto& config = path.config();
  const auto& measure = config.measure();
  const auto& ev = path.events();
  std::size_t mismatches = 0;
  std::size_t seen = 0;
  std::vector<Atom> buf;
  for (const auto& r : path.ceiling_trace()) {
    const double lo = std::max(static_cast<double>(r.cell) * measure.cell_dt(), path.start());
    const double hi = std::min(static_cast<double>(r.cell + 1) * measure.cell_dt(), path.horizon());
    buf.clear();
    const auto strips = strips_covering(r.ceiling, measure.cell_dtheta());
    for (std::int64_t j = 0; j < strips; ++j) {
      measure.append_cell({r.cell, j}, buf);
      config.append_added_in_cell({r.cell, j}, buf);
    }
    for (const auto& a : buf) {
      if (a.t < lo || a.t >= hi || a.theta > r.ceiling) continue;
      const bool should = a.theta <= path.intensity(a.t);
      const bool is_event = std::binary_search(ev.begin(), ev.end(), a, atom_before);
      if (should != is_event) ++mismatches;
      if (is_event) ++seen;
    }
  }
  return mismatches + (ev.size() - std::min(seen, ev.size()));
}

double compensator(const EventPath& path, Quadrature method) {
  return integrate_path(path, Transform::Identity, method);
}

double integral_sqrt_intensity(const EventPath& path, Quadrature method) {
  return integrate_path(path, Transform::Sqrt, method);
}

double integral_inv_sqrt_intensity(const EventPath& path, Quadrature method) {
  return integrate_path(path, Transform::InvSqrt, method);
}

// ---------------------------------------------------------------- curve thinning

CurvePath simulate_curve(std::shared_ptr<const GridFunction> curve, const Configuration& config, double horizon,
                         const SimulationOptions& options) {
  if (!curve || curve->size() < 2) throw std::invalid_argument("simulate_curve: empty curve");
  if (curve->horizon() + 1e-9 * horizon < horizon) {
    throw std::invalid_argument("simulate_curve: curve does not cover the horizon");
  }
  const GridFunction& f = *curve;
  for (double v : f.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("simulate_curve: curve must be >= 0");
  }
  CurvePath out{curve, horizon, {}};
  const auto& measure = config.measure();
  const double initial = f.values.front() > 0.0 ? 2.0 * f.values.front() : 1.0;
  const auto i1 = measure.time_cell(horizon);
  std::vector<Atom> buf;
  for (std::int64_t i = 0; i <= i1; ++i) {
    const double lo = static_cast<double>(i) * measure.cell_dt();
    const double hi = std::min(static_cast<double>(i + 1) * measure.cell_dt(), horizon);
    if (!(lo < hi)) continue;
    double bound = std::max(f(lo), f(hi));
    const auto k0 = static_cast<std::size_t>(std::ceil(lo / f.dt));
    for (auto k = k0; k < f.size() && static_cast<double>(k) * f.dt <= hi; ++k) bound = std::max(bound, f.values[k]);
    const double ceiling = next_ceiling(initial, bound, options.max_ceiling);
    const auto strips = strips_covering(ceiling, measure.cell_dtheta());
    for (std::int64_t j = 0; j < strips; ++j) {
      buf.clear();
      measure.append_cell({i, j}, buf);
      config.append_added_in_cell({i, j}, buf);
      for (const auto& a : buf) {
        if (a.t >= lo && a.t < hi && a.theta <= f(a.t)) out.events.push_back(a);
      }
    }
  }
  std::sort(out.events.begin(), out.events.end(), atom_before);
  return out;
}

// ---------------------------------------------------------------- discrete

std::uint64_t DiscretePath::total() const {
  std::uint64_t s = 0;
  for (auto x : counts) s += x;
  return s;
}

DiscretePath simulate_discrete(const Discrete& spec, std::size_t steps, std::uint64_t seed) {
  require_valid(ModelSpec{spec});
  DiscretePath path;
  path.counts.reserve(steps);
  path.intensities.reserve(steps);
  const auto& alphas = spec.alphas;
  const auto& finite = alphas.values();
  double geometric_state = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) {
    double lam = spec.alpha0;
    if (alphas.is_geometric_tail()) {
      lam += geometric_state;
    } else {
      const std::size_t depth = std::min(finite.size(), k - 1);
      for (std::size_t lag = 1; lag <= depth; ++lag) {
        lam += finite[lag - 1] * static_cast<double>(path.counts[k - 1 - lag]);
      }
    }
    CounterStream stream(seed, StreamDomain::DiscreteStep, k, 0);
    const auto x = sample_poisson(lam, stream);
    path.counts.push_back(x);
    path.intensities.push_back(lam);
    if (alphas.is_geometric_tail()) {
      geometric_state = alphas.ratio() * geometric_state + alphas.first() * static_cast<double>(x);
    }
  }
  return path;
}

}  // namespace hawkes_stein
