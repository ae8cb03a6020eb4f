// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "hawkes_stein/experiment.hpp"

using namespace hawkes_stein;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr std::size_t kReps = 20000;

bool in_range(double slope) { return slope >= -0.7 && slope <= -0.3; }

std::string describe(const SweepResult& r) {
  std::string s;
  char buf[160];
  for (const auto& h : r.horizons) {
    std::snprintf(buf, sizeof buf, "T=%g dW=%.4f(%.4f) floor=%.4f; ", h.horizon, h.dw, h.se, h.floor);
    s += buf;
  }
  if (r.fit) {
    std::snprintf(buf, sizeof buf, "slope=%.3f(%.3f)", r.fit->slope, r.fit->slope_se);
    s += buf;
  }
  return s;
}

SweepResult sweep(const ExperimentConfig& c) {
  SweepOptions o;
  o.horizons = c.horizons;
  o.reps = c.replications;
  o.bootstrap = c.bootstrap;
  o.bootstrap_seed = c.seed + 1;
  return run_sweep(make_pipeline(c), o);
}

ExperimentConfig linear_config() {
  ExperimentConfig c;
  c.horizons = {50, 100, 200, 400, 800};
  c.replications = kReps;
  c.seed = 11;
  c.sigma2 = 2.0;
  return c;
}

SweepResult& linear_sweep() {
  static SweepResult r = sweep(linear_config());
  return r;
}

Outcome linear_rate() {
  const auto& r = linear_sweep();
  const bool pass = r.fit && in_range(r.fit->slope) && decreasing_beyond(r, 2.0);
  return {pass, describe(r) + (r.floor_ok() ? "" : " [floor within 4x of smallest dW]")};
}

Outcome discrete_rate() {
  ExperimentConfig c;
  c.model.variant = "discrete";
  c.model.alpha0 = 1.0;
  c.model.alphas = {"truncated_geometric", {{"first", 0.3}, {"ratio", 0.5}, {"terms", 40}}, {}};
  c.horizons = {64, 256, 1024, 4096};
  c.replications = kReps;
  c.seed = 12;
  bool pass = true;
  std::string detail;
  for (auto mode : {DiscreteMode::Martingale, DiscreteMode::RawCount}) {
    c.discrete_mode = mode;
    const auto r = sweep(c);
    const double target = mode == DiscreteMode::Martingale ? 2.5 : 15.625;
    pass = pass && r.fit && in_range(r.fit->slope) && std::abs(r.sigma2 - target) < 1e-9;
    detail += std::string(mode == DiscreteMode::Martingale ? "martingale" : "raw") + " (sigma2=" +
              format_double(r.sigma2).substr(0, 8) + "): " + describe(r) + "  ";
  }
  return {pass, detail};
}

Outcome variance_reduction() {
  const auto a = check_reduced_variance(linear_reference(), 200.0, 13, 10000);
  const auto b = check_third_moment(linear_reference(), 200.0, 13, 10000);
  return {a.pass && b.pass, a.detail + "; " + b.detail};
}

Outcome resolvent_closed_form() {
  const auto r = check_resolvent_closed_form();
  return {r.pass, r.detail};
}

Outcome malliavin_domination() {
  const std::vector<double> lags{0.25, 0.5, 1.0, 2.0, 4.0};
  const auto a = check_malliavin_domination(linear_reference(), lags, 15, 10000);
  const auto b = check_malliavin_domination(inhibition_reference(), lags, 15, 10000);
  return {a.pass && b.pass, "linear: " + a.detail + " inhibition: " + b.detail};
}

Outcome divergence_isometry() {
  const auto r = check_divergence_isometry(16, 10000);
  return {r.pass, r.detail};
}

Outcome comparison() {
  const auto r = check_comparison(1.0, Kernel::exponential(0.5, 1.0), Link::identity(), 100.0, 17, 1000);
  return {r.pass, r.detail};
}

Outcome nearly_unstable() {
  ExperimentConfig c;
  c.model.variant = "nearly_unstable";
  c.model.mu = 1.0;
  c.model.kernel = {"exponential", {{"scale", 1.0}, {"rate", 1.0}}, {}};
  c.normalization = Normalization::DeterministicG;
  c.horizons = {32, 64, 128, 256};
  c.replications = kReps;
  c.seed = 18;
  const auto start = std::chrono::steady_clock::now();
  const auto r = sweep(c);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = r.fit && in_range(r.fit->slope) && seconds <= 600.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, " runtime=%.0fs", seconds);
  return {pass, describe(r) + buf + (r.floor_ok() ? "" : " [floor within 4x of smallest dW]")};
}

Outcome locally_stationary() {
  ExperimentConfig c;
  c.model.variant = "locally_stationary";
  c.model.mu_fn = {1.0, 0.5};
  c.model.gamma_fn = {0.4, 0.2};
  c.model.kernel = {"exponential", {{"scale", 1.0}, {"rate", 1.0}}, {}};
  c.horizons = {100, 200, 400};
  c.replications = kReps;
  c.seed = 19;
  const auto r = sweep(c);
  const auto& last = r.horizons.back().sample;
  const double var = last.variance(), se = last.variance_standard_error();
  const bool var_ok = std::abs(var - r.sigma2) <= 4.0 * se;
  const bool pass = var_ok && r.fit && in_range(r.fit->slope);
  char buf[128];
  std::snprintf(buf, sizeof buf, "Var(F^400)=%.4f(%.4f) sigma2=%.4f; ", var, se, r.sigma2);
  return {pass, buf + describe(r)};
}

Outcome deterministic_g() {
  const auto& sweep_result = linear_sweep();
  BoundOptions o;
  o.seed = 20;
  o.sigma2 = 2.0;
  const auto spec = linear_reference();
  const auto t100 = bound_terms(spec, 100.0, 4000, Normalization::UnitG, o);
  const auto t400 = bound_terms(spec, 400.0, 4000, Normalization::UnitG, o);
  bool zeros = true;
  for (const auto* t : {&t100, &t400}) {
    for (std::size_t k = 2; k < t->part2.size(); ++k) zeros = zeros && t->part2[k].exact_zero && t->part2[k].mean == 0.0;
  }
  auto dw_at = [&](double T) {
    for (const auto& h : sweep_result.horizons) {
      if (h.horizon == T) return h.dw;
    }
    return std::nan("");
  };
  const double term_ratio = t100.part2[0].mean / t400.part2[0].mean;
  const double dw_ratio = dw_at(100.0) / dw_at(400.0);
  const bool consistent = term_ratio > 1.0 && dw_ratio > 1.0 && std::abs(std::log(term_ratio / dw_ratio)) <= std::log(2.0);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "terms 3-5 zero=%s; E|s2-(1/T)int lambda| T=100: %.4f(%.4f) T=400: %.4f(%.4f), ratio %.3f vs dW ratio %.3f",
                zeros ? "yes" : "no", t100.part2[0].mean, t100.part2[0].se, t400.part2[0].mean, t400.part2[0].se,
                term_ratio, dw_ratio);
  return {zeros && consistent, buf};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::size_t> expected;
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--expect-fail") expected.insert(std::strtoul(argv[i + 1], nullptr, 10));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"rate recovery, linear continuous", linear_rate},
      {"rate recovery, discrete", discrete_rate},
      {"variance reduction identities", variance_reduction},
      {"resolvent closed form", resolvent_closed_form},
      {"malliavin domination", malliavin_domination},
      {"divergence isometry", divergence_isometry},
      {"comparison property", comparison},
      {"nearly unstable normalization", nearly_unstable},
      {"locally stationary target", locally_stationary},
      {"deterministic g structure", deterministic_g},
  };
  int failures = 0;
  std::set<std::size_t> failed;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, s, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
    if (!o.pass) failed.insert(k + 1);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  if (!expected.empty()) {
    std::printf("known failures:");
    for (auto k : expected) std::printf(" %zu", k);
    std::printf("\n");
  }
  return failed == expected ? 0 : 1;
}
