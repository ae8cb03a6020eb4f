#include "hawkes_stein/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <set>

#include "hawkes_stein/parallel.hpp"
#include "hawkes_stein/philox.hpp"
#include "hawkes_stein/simulate.hpp"
#include "hawkes_stein/volterra.hpp"

namespace hawkes_stein {

using nlohmann::json;

namespace {

void allow_keys(const json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

double number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

std::uint64_t unsigned_or(const json& j, const std::string& key, std::uint64_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(where + ": '" + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> number_list(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) throw ConfigError(where + ": '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

struct FamilySchema {
  std::vector<std::string> required;
  std::vector<std::string> optional;
  bool values = false;
};

const std::map<std::string, FamilySchema>& kernel_schemas() {
  static const std::map<std::string, FamilySchema> s{
      {"exponential", {{"scale", "rate"}, {}, false}},
      {"power_law", {{"scale", "delta", "exponent"}, {}, false}},
      {"compact_polynomial", {{"scale", "support", "power"}, {}, false}},
      {"tabulated", {{"dt"}, {}, true}},
  };
  return s;
}

const std::map<std::string, FamilySchema>& link_schemas() {
  static const std::map<std::string, FamilySchema> s{
      {"identity", {{}, {}, false}},
      {"positive_part", {{}, {}, false}},
      {"affine_clipped", {{"intercept", "slope"}, {"cap"}, false}},
      {"sigmoid", {{"scale"}, {"steepness"}, false}},
      {"tabulated", {{"x0", "dx"}, {}, true}},
  };
  return s;
}

const std::map<std::string, FamilySchema>& alpha_schemas() {
  static const std::map<std::string, FamilySchema> s{
      {"geometric", {{"first", "ratio"}, {}, false}},
      {"truncated_geometric", {{"first", "ratio", "terms"}, {}, false}},
      {"finite", {{}, {}, true}},
  };
  return s;
}

FamilyConfig family_from_json(const json& j, const std::map<std::string, FamilySchema>& schemas,
                              const std::string& where) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw ConfigError(where + ": needs a string 'family'");
  }
  FamilyConfig f;
  f.family = j.at("family").get<std::string>();
  const auto it = schemas.find(f.family);
  if (it == schemas.end()) throw ConfigError(where + ": unknown family '" + f.family + "'");
  const auto& schema = it->second;
  std::set<std::string> keys{"family"};
  for (const auto& k : schema.required) keys.insert(k);
  for (const auto& k : schema.optional) keys.insert(k);
  if (schema.values) keys.insert("values");
  allow_keys(j, keys, where);
  for (const auto& k : schema.required) f.params[k] = number(j, k, where);
  for (const auto& k : schema.optional) {
    if (j.contains(k)) f.params[k] = number(j, k, where);
  }
  if (schema.values) f.values = number_list(j, "values", where);
  return f;
}

json family_to_json(const FamilyConfig& f) {
  json j{{"family", f.family}};
  for (const auto& [k, v] : f.params) j[k] = v;
  if (!f.values.empty()) j["values"] = f.values;
  return j;
}

ProfileConfig profile_from_json(const json& j, const std::string& where) {
  allow_keys(j, {"intercept", "slope"}, where);
  return {number(j, "intercept", where), number_or(j, "slope", 0.0, where)};
}

const std::map<std::string, std::set<std::string>>& variant_keys() {
  static const std::map<std::string, std::set<std::string>> s{
      {"empty_history", {"variant", "mu", "kernel", "link"}},
      {"stationaryized", {"variant", "mu", "kernel", "link", "burn_in"}},
      {"locally_stationary", {"variant", "mu_fn", "gamma_fn", "kernel"}},
      {"discrete", {"variant", "alpha0", "alphas"}},
      {"nearly_unstable", {"variant", "mu", "kernel", "max_horizon"}},
  };
  return s;
}

ModelConfig model_from_json(const json& j) {
  if (!j.is_object() || !j.contains("variant") || !j.at("variant").is_string()) {
    throw ConfigError("model: needs a string 'variant'");
  }
  ModelConfig m;
  m.variant = j.at("variant").get<std::string>();
  const auto it = variant_keys().find(m.variant);
  if (it == variant_keys().end()) throw ConfigError("model: unknown variant '" + m.variant + "'");
  allow_keys(j, it->second, "model");
  if (it->second.count("mu")) m.mu = number(j, "mu", "model");
  if (it->second.count("kernel")) m.kernel = family_from_json(j.at("kernel"), kernel_schemas(), "model.kernel");
  if (it->second.count("link")) {
    m.link = j.contains("link") ? family_from_json(j.at("link"), link_schemas(), "model.link") : m.link;
  }
  if (j.contains("burn_in")) m.burn_in = number(j, "burn_in", "model");
  if (it->second.count("mu_fn")) {
    if (!j.contains("mu_fn") || !j.contains("gamma_fn")) throw ConfigError("model: needs mu_fn and gamma_fn");
    m.mu_fn = profile_from_json(j.at("mu_fn"), "model.mu_fn");
    m.gamma_fn = profile_from_json(j.at("gamma_fn"), "model.gamma_fn");
  }
  if (it->second.count("alpha0")) {
    m.alpha0 = number(j, "alpha0", "model");
    if (!j.contains("alphas")) throw ConfigError("model: missing 'alphas'");
    m.alphas = family_from_json(j.at("alphas"), alpha_schemas(), "model.alphas");
  }
  if (it->second.count("max_horizon")) m.max_horizon = number_or(j, "max_horizon", 512.0, "model");
  return m;
}

json model_to_json(const ModelConfig& m) {
  const auto& keys = variant_keys().at(m.variant);
  json j{{"variant", m.variant}};
  if (keys.count("mu")) j["mu"] = m.mu;
  if (keys.count("kernel")) j["kernel"] = family_to_json(m.kernel);
  if (keys.count("link")) j["link"] = family_to_json(m.link);
  if (keys.count("burn_in") && m.burn_in) j["burn_in"] = *m.burn_in;
  if (keys.count("mu_fn")) {
    j["mu_fn"] = {{"intercept", m.mu_fn.intercept}, {"slope", m.mu_fn.slope}};
    j["gamma_fn"] = {{"intercept", m.gamma_fn.intercept}, {"slope", m.gamma_fn.slope}};
  }
  if (keys.count("alpha0")) {
    j["alpha0"] = m.alpha0;
    j["alphas"] = family_to_json(m.alphas);
  }
  if (keys.count("max_horizon")) j["max_horizon"] = m.max_horizon;
  return j;
}

const std::map<std::string, Normalization>& normalizations() {
  static const std::map<std::string, Normalization> s{
      {"unit", Normalization::UnitG}, {"self", Normalization::SelfG}, {"deterministic", Normalization::DeterministicG}};
  return s;
}

std::string normalization_name(Normalization n) {
  for (const auto& [k, v] : normalizations()) {
    if (v == n) return k;
  }
  return "unit";
}

template <class F>
auto wrap_config(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const auto n = static_cast<double>(v.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Configuration config_for(std::uint64_t seed, std::size_t h, std::size_t r) {
  return Configuration(DrivingMeasure(derive_seed(seed, h, r)));
}

}  // namespace

// ---------------------------------------------------------------- config

ExperimentConfig config_from_json(const json& j) {
  allow_keys(j,
             {"model", "horizons", "replications", "seed", "normalization", "discrete_mode", "sigma2", "bootstrap",
              "curve_dt", "outputs", "threads", "budget", "resolvent", "bound"},
             "config");
  ExperimentConfig c;
  if (!j.contains("model")) throw ConfigError("config: missing 'model'");
  c.model = model_from_json(j.at("model"));
  if (j.contains("horizons")) c.horizons = number_list(j, "horizons", "config");
  if (c.horizons.empty()) throw ConfigError("config: 'horizons' must not be empty");
  for (double h : c.horizons) {
    if (!(h > 0.0)) throw ConfigError("config: horizons must be > 0");
  }
  c.replications = unsigned_or(j, "replications", c.replications, "config");
  if (c.replications < 2) throw ConfigError("config: 'replications' must be >= 2");
  c.seed = unsigned_or(j, "seed", c.seed, "config");
  if (j.contains("normalization")) {
    const auto& v = j.at("normalization");
    if (!v.is_string() || !normalizations().count(v.get<std::string>())) {
      throw ConfigError("config: 'normalization' must be unit, self or deterministic");
    }
    c.normalization = normalizations().at(v.get<std::string>());
  }
  if (j.contains("discrete_mode")) {
    const auto& v = j.at("discrete_mode");
    if (v == "martingale") {
      c.discrete_mode = DiscreteMode::Martingale;
    } else if (v == "raw_count") {
      c.discrete_mode = DiscreteMode::RawCount;
    } else {
      throw ConfigError("config: 'discrete_mode' must be martingale or raw_count");
    }
  }
  if (j.contains("sigma2")) {
    c.sigma2 = number(j, "sigma2", "config");
    if (!(*c.sigma2 > 0.0)) throw ConfigError("config: 'sigma2' must be > 0");
  }
  c.bootstrap = unsigned_or(j, "bootstrap", c.bootstrap, "config");
  if (c.bootstrap < 2) throw ConfigError("config: 'bootstrap' must be >= 2");
  c.curve_dt = number_or(j, "curve_dt", c.curve_dt, "config");
  if (!(c.curve_dt > 0.0)) throw ConfigError("config: 'curve_dt' must be > 0");
  if (j.contains("outputs")) {
    allow_keys(j.at("outputs"), {"dir"}, "outputs");
    if (j.at("outputs").contains("dir")) {
      if (!j.at("outputs").at("dir").is_string()) throw ConfigError("outputs: 'dir' must be a string");
      c.output_dir = j.at("outputs").at("dir").get<std::string>();
    }
  }
  c.threads = static_cast<int>(unsigned_or(j, "threads", 0, "config"));
  c.budget = number_or(j, "budget", 0.0, "config");
  if (c.budget < 0.0) throw ConfigError("config: 'budget' must be >= 0");
  if (j.contains("resolvent")) {
    const auto& r = j.at("resolvent");
    allow_keys(r, {"alpha", "horizon", "dt"}, "resolvent");
    c.resolvent.alpha = number_or(r, "alpha", c.resolvent.alpha, "resolvent");
    c.resolvent.horizon = number_or(r, "horizon", c.resolvent.horizon, "resolvent");
    c.resolvent.dt = number_or(r, "dt", c.resolvent.dt, "resolvent");
  }
  if (j.contains("bound")) {
    const auto& b = j.at("bound");
    allow_keys(b, {"reps", "t_subsample"}, "bound");
    BoundConfig bc;
    bc.reps = unsigned_or(b, "reps", bc.reps, "bound");
    bc.t_subsample = unsigned_or(b, "t_subsample", bc.t_subsample, "bound");
    c.bound = bc;
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"model", model_to_json(c.model)},
         {"horizons", c.horizons},
         {"replications", c.replications},
         {"seed", c.seed},
         {"normalization", normalization_name(c.normalization)},
         {"discrete_mode", c.discrete_mode == DiscreteMode::Martingale ? "martingale" : "raw_count"},
         {"bootstrap", c.bootstrap},
         {"curve_dt", c.curve_dt},
         {"outputs", {{"dir", c.output_dir}}},
         {"threads", c.threads},
         {"budget", c.budget},
         {"resolvent", {{"alpha", c.resolvent.alpha}, {"horizon", c.resolvent.horizon}, {"dt", c.resolvent.dt}}}};
  if (c.sigma2) j["sigma2"] = *c.sigma2;
  if (c.bound) j["bound"] = {{"reps", c.bound->reps}, {"t_subsample", c.bound->t_subsample}};
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return config_from_json(j);
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string s = config_to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

Kernel build_kernel(const FamilyConfig& k) {
  return wrap_config([&] {
    const auto& p = k.params;
    if (k.family == "exponential") return Kernel::exponential(p.at("scale"), p.at("rate"));
    if (k.family == "power_law") return Kernel::power_law(p.at("scale"), p.at("delta"), p.at("exponent"));
    if (k.family == "compact_polynomial") {
      return Kernel::compact_polynomial(p.at("scale"), p.at("support"), p.at("power"));
    }
    if (k.family == "tabulated") return Kernel::tabulated(p.at("dt"), k.values);
    throw ConfigError("unknown kernel family '" + k.family + "'");
  });
}

Link build_link(const FamilyConfig& l) {
  return wrap_config([&] {
    const auto& p = l.params;
    if (l.family == "identity") return Link::identity();
    if (l.family == "positive_part") return Link::positive_part();
    if (l.family == "affine_clipped") {
      return Link::affine_clipped(p.at("intercept"), p.at("slope"), p.count("cap") ? p.at("cap") : HUGE_VAL);
    }
    if (l.family == "sigmoid") return Link::sigmoid(p.at("scale"), p.count("steepness") ? p.at("steepness") : 1.0);
    if (l.family == "tabulated") return Link::tabulated(p.at("x0"), p.at("dx"), l.values);
    throw ConfigError("unknown link family '" + l.family + "'");
  });
}

DiscreteKernel build_alphas(const FamilyConfig& a) {
  return wrap_config([&] {
    const auto& p = a.params;
    if (a.family == "geometric") return DiscreteKernel::geometric(p.at("first"), p.at("ratio"));
    if (a.family == "truncated_geometric") {
      const double terms = p.at("terms");
      if (!(terms >= 0.0) || terms != std::floor(terms)) throw ConfigError("alphas: 'terms' must be an integer");
      return DiscreteKernel::truncated_geometric(p.at("first"), p.at("ratio"), static_cast<int>(terms));
    }
    if (a.family == "finite") return DiscreteKernel::finite(a.values);
    throw ConfigError("unknown alphas family '" + a.family + "'");
  });
}

ModelSpec build_model(const ModelConfig& m, double horizon) {
  ModelSpec spec = wrap_config([&]() -> ModelSpec {
    if (m.variant == "empty_history") return EmptyHistory{m.mu, build_kernel(m.kernel), build_link(m.link)};
    if (m.variant == "stationaryized") {
      const Kernel k = build_kernel(m.kernel);
      const Link l = build_link(m.link);
      return Stationaryized{m.mu, k, l, m.burn_in ? *m.burn_in : default_burn_in(k, l)};
    }
    if (m.variant == "locally_stationary") {
      return LocallyStationary{Profile::affine(m.mu_fn.intercept, m.mu_fn.slope),
                               Profile::affine(m.gamma_fn.intercept, m.gamma_fn.slope), build_kernel(m.kernel)};
    }
    if (m.variant == "discrete") return Discrete{m.alpha0, build_alphas(m.alphas)};
    if (m.variant == "nearly_unstable") {
      if (horizon > m.max_horizon) {
        throw ConfigError("nearly unstable horizon " + format_double(horizon) + " exceeds max_horizon " +
                          format_double(m.max_horizon));
      }
      return NearlyUnstable{m.mu, build_kernel(m.kernel), horizon};
    }
    throw ConfigError("unknown variant '" + m.variant + "'");
  });
  const auto violations = validate(spec);
  if (!violations.empty()) {
    std::string msg;
    for (const auto& v : violations) msg += (msg.empty() ? "" : "; ") + v.message;
    throw ModelViolation(msg);
  }
  return spec;
}

// ---------------------------------------------------------------- pipeline

Deadline::Deadline(double seconds) : seconds_(seconds), start_(std::chrono::steady_clock::now()) {}

bool Deadline::expired() const {
  if (!(seconds_ > 0.0)) return false;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count() > seconds_;
}

void Deadline::check() const {
  if (expired()) throw BudgetExceeded("wall-clock budget exceeded");
}

Pipeline make_pipeline(const ExperimentConfig& c) {
  std::vector<ModelSpec> specs;
  for (double h : c.horizons) specs.push_back(build_model(c.model, h));
  const auto seed = c.seed;
  const auto horizons = c.horizons;
  Pipeline p;
  if (c.model.variant == "discrete") {
    if (c.normalization != Normalization::UnitG) throw ConfigError("discrete models use the unit normalization");
    const Discrete d = std::get<Discrete>(specs.front());
    const auto mode = c.discrete_mode;
    const auto dc = derived_constants(specs.front());
    p.sigma2 = mode == DiscreteMode::Martingale ? *dc.sigma2_target : *dc.raw_count_variance;
    p.functional = mode == DiscreteMode::Martingale ? "discrete_martingale" : "discrete_raw_count";
    p.replicate = [d, mode, seed, horizons](std::size_t h, std::size_t r) {
      const auto n = static_cast<std::size_t>(std::llround(horizons[h]));
      return functional_discrete(simulate_discrete(d, n, derive_seed(seed, h, r)), mode, d);
    };
  } else if (c.normalization == Normalization::DeterministicG) {
    if (c.model.variant != "nearly_unstable") {
      throw ConfigError("the deterministic normalization is available for the nearly unstable variant");
    }
    std::vector<std::shared_ptr<const GridFunction>> curves;
    for (const auto& s : specs) {
      curves.push_back(std::make_shared<const GridFunction>(
          mean_intensity_nearly_unstable(std::get<NearlyUnstable>(s), c.curve_dt)));
    }
    p.sigma2 = 1.0;
    p.functional = "nearly_unstable_curve";
    p.replicate = [curves, seed, horizons](std::size_t h, std::size_t r) {
      return functional_nearly(simulate_curve(curves[h], config_for(seed, h, r), horizons[h]), *curves[h]);
    };
  } else if (c.normalization == Normalization::SelfG) {
    for (std::size_t h = 0; h < specs.size(); ++h) {
      if (!(Dynamics(specs[h], horizons[h]).positivity_floor() > 0.0)) {
        throw ModelViolation("self normalization needs h non-decreasing, phi >= 0 and a positive baseline");
      }
    }
    p.sigma2 = 1.0;
    p.functional = "reduced";
    p.replicate = [specs, seed, horizons](std::size_t h, std::size_t r) {
      return functional_reduced(simulate(specs[h], config_for(seed, h, r), horizons[h]));
    };
  } else {
    p.sigma2 = c.sigma2;
    if (!p.sigma2) p.sigma2 = derived_constants(specs.back()).sigma2_target;
    p.functional = "standard";
    p.replicate = [specs, seed, horizons](std::size_t h, std::size_t r) {
      return functional_standard(simulate(specs[h], config_for(seed, h, r), horizons[h]));
    };
  }
  if (c.sigma2) p.sigma2 = c.sigma2;
  return p;
}

bool SweepResult::floor_ok() const {
  if (horizons.empty()) return false;
  double smallest = horizons.front().dw;
  double floor = 0.0;
  for (const auto& h : horizons) {
    smallest = std::min(smallest, h.dw);
    floor = std::max(floor, h.floor);
  }
  return 4.0 * floor <= smallest;
}

SweepResult run_sweep(const Pipeline& pipeline, const SweepOptions& options) {
  SweepResult out;
  for (std::size_t h = 0; h < options.horizons.size(); ++h) {
    if (options.deadline && options.deadline->expired()) {
      out.partial = true;
      break;
    }
    HorizonSummary s;
    s.horizon = options.horizons[h];
    try {
      s.sample.values = parallel_map<double>(
          options.reps,
          [&](std::size_t r) {
            if (options.deadline) options.deadline->check();
            return pipeline.replicate(h, r);
          },
          options.threads);
    } catch (const BudgetExceeded&) {
      out.partial = true;
      break;
    }
    s.sample.horizon = s.horizon;
    s.sample.meta = pipeline.functional;
    out.horizons.push_back(std::move(s));
  }
  if (out.horizons.empty()) return out;
  if (pipeline.sigma2) {
    out.sigma2 = *pipeline.sigma2;
  } else {
    out.sigma2 = out.horizons.back().sample.variance();
    out.sigma2_estimated = true;
  }
  for (std::size_t h = 0; h < out.horizons.size(); ++h) {
    auto& s = out.horizons[h];
    s.sample.sigma2_target = out.sigma2;
    s.dw = w1_to_gaussian(s.sample.values, out.sigma2);
    s.se = bootstrap_se(s.sample.values, out.sigma2, options.bootstrap, derive_seed(options.bootstrap_seed, h, 0),
                        options.threads);
    s.floor = w1_bias_floor(s.sample.values.size(), out.sigma2);
  }
  if (out.horizons.size() >= 3) {
    std::vector<RatePoint> pts;
    for (const auto& s : out.horizons) pts.push_back({s.horizon, s.dw, s.se});
    out.fit = fit_rate(pts);
  }
  return out;
}

bool decreasing_beyond(const SweepResult& r, double k) {
  const auto& h = r.horizons;
  if (h.size() < 2) return false;
  for (std::size_t i = 0; i + 1 < h.size(); ++i) {
    if (!(h[i + 1].dw < h[i].dw)) return false;
  }
  const double drop = h.front().dw - h.back().dw;
  return drop > k * std::hypot(h.front().se, h.back().se);
}

// ---------------------------------------------------------------- checks

ModelSpec linear_reference() { return EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::identity()}; }

ModelSpec inhibition_reference() {
  return EmptyHistory{1.0, Kernel::exponential(-0.5, 1.0), Link::positive_part()};
}

CheckResult check_divergence_isometry(std::uint64_t seed, std::size_t reps, int threads) {
  const auto u = step_integrand({{0.0, 2.0, 0.0, 1.0, 1.0}, {2.0, 5.0, 0.5, 2.0, -0.7}, {1.0, 2.0, 1.0, 1.5, 0.4}});
  const double horizon = 5.0;
  const auto sq = step_integrand({{0.0, 2.0, 0.0, 1.0, 1.0}, {2.0, 5.0, 0.5, 2.0, 0.49}, {1.0, 2.0, 1.0, 1.5, 0.16}});
  const double target = sq.integral(horizon);
  const auto v = parallel_map<double>(
      reps,
      [&](std::size_t r) {
        const double d = divergence(config_for(seed, 0, r), u, horizon);
        return d * d;
      },
      threads);
  const double m = mean_of(v), se = se_of(v);
  return {"divergence_isometry", std::abs(m - target) <= 4.0 * se,
          fmt("E[delta(u)^2] = %.6g +- %.3g, int u^2 = %.6g", m, se, target)};
}

CheckResult check_reduced_variance(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t reps,
                                   int threads) {
  FunctionalSample s;
  s.values = parallel_map<double>(
      reps, [&](std::size_t r) { return functional_reduced(simulate(spec, config_for(seed, 0, r), horizon)); },
      threads);
  const double var = s.variance(), se = s.variance_standard_error();
  return {"reduced_variance", std::abs(var - 1.0) <= 4.0 * se, fmt("Var = %.6g +- %.3g, target 1", var, se)};
}

CheckResult check_third_moment(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t reps,
                               int threads) {
  const auto pairs = parallel_map<std::pair<double, double>>(
      reps,
      [&](std::size_t r) {
        const EventPath p = simulate(spec, config_for(seed, 0, r), horizon);
        const double F = functional_reduced(p);
        return std::make_pair(F * F * F, integral_inv_sqrt_intensity(p) / std::pow(horizon, 1.5));
      },
      threads);
  std::vector<double> a(reps), b(reps);
  for (std::size_t r = 0; r < reps; ++r) std::tie(a[r], b[r]) = pairs[r];
  const double ma = mean_of(a), mb = mean_of(b), sa = se_of(a), sb = se_of(b);
  const bool pass = std::abs(ma - mb) <= 1.96 * std::hypot(sa, sb);
  return {"third_moment", pass, fmt("E[F^3] = %.5g +- %.3g, T^-3/2 E int lambda^-1/2 = %.5g +- %.3g", ma, sa, mb, sb)};
}

CheckResult check_malliavin_domination(const ModelSpec& spec, const std::vector<double>& lags, std::uint64_t seed,
                                       std::size_t reps, int threads) {
  const auto* m = std::get_if<EmptyHistory>(&spec);
  if (!m) throw std::invalid_argument("check_malliavin_domination: needs an empty-history spec");
  const double horizon = *std::max_element(lags.begin(), lags.end()) + 1.0;
  const auto rows = parallel_map<std::vector<double>>(
      reps,
      [&](std::size_t r) {
        const auto paths = simulate_coupled(spec, config_for(seed, 0, r), horizon, {0.0, 0.0});
        std::vector<double> d;
        for (double s : lags) d.push_back(std::abs(paths.shifted.intensity(s) - paths.base.intensity(s)));
        return d;
      },
      threads);
  const auto psi = resolvent(m->kernel, m->link.lipschitz(), horizon, 1e-3);
  bool pass = true;
  std::string detail;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    std::vector<double> col(reps);
    for (std::size_t r = 0; r < reps; ++r) col[r] = rows[r][k];
    const double mk = mean_of(col), sk = se_of(col), bound = psi.base(lags[k]);
    pass = pass && mk <= bound + 4.0 * sk;
    detail += fmt("s=%g: %.4g +- %.2g vs psi %.4g; ", lags[k], mk, sk, bound);
  }
  return {"malliavin_domination", pass, detail};
}

CheckResult check_comparison(double mu, const Kernel& kernel, const Link& link, double horizon, std::uint64_t seed,
                             std::size_t paths, int threads) {
  const ModelSpec empty = EmptyHistory{mu, kernel, link};
  const ModelSpec stationary = Stationaryized{mu, kernel, link, default_burn_in(kernel, link)};
  const auto counts = parallel_map<std::pair<std::size_t, std::size_t>>(
      paths,
      [&](std::size_t r) {
        const Configuration config = config_for(seed, 0, r);
        const EventPath a = simulate(empty, config, horizon);
        const EventPath b = simulate(stationary, config, horizon);
        std::size_t violations = 0, checked = 0;
        for (const auto* p : {&a, &b}) {
          for (auto k = p->events_before(0.0); k < p->events().size(); ++k) {
            const double t = p->events()[k].t;
            const double lb = b.intensity(t), la = a.intensity(t);
            ++checked;
            if (lb < la - 1e-12 * std::max(1.0, la)) ++violations;
          }
        }
        return std::make_pair(violations, checked);
      },
      threads);
  std::size_t violations = 0, checked = 0;
  for (const auto& [v, c] : counts) {
    violations += v;
    checked += c;
  }
  return {"stationary_comparison", violations == 0,
          std::to_string(violations) + " violations at " + std::to_string(checked) + " event times"};
}

CheckResult check_martingale(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t reps,
                             int threads) {
  const auto v = parallel_map<double>(
      reps,
      [&](std::size_t r) {
        const EventPath p = simulate(spec, config_for(seed, 0, r), horizon);
        return static_cast<double>(p.count()) - compensator(p);
      },
      threads);
  const double m = mean_of(v), se = se_of(v);
  return {"martingale", std::abs(m) <= 4.0 * se, fmt("E[H_T - int lambda] = %.5g +- %.3g", m, se)};
}

CheckResult check_resolvent_closed_form() {
  const Kernel kernel = Kernel::exponential(1.0, 1.0);
  const auto psi = resolvent(kernel, 0.5, 10.0, 1e-3);
  double err = 0.0;
  for (std::size_t k = 0; k < psi.base.size(); ++k) {
    const double t = static_cast<double>(k) * psi.base.dt;
    err = std::max(err, std::abs(psi.base.values[k] - 0.5 * std::exp(-0.5 * t)));
  }
  const double total = resolvent(kernel, 0.5, 60.0, 1e-2).base.trapezoid();
  const bool pass = err < 1e-4 && std::abs(total - 1.0) <= 1e-3;
  return {"resolvent_closed_form", pass, fmt("max error %.3g, int psi = %.8g", err, total)};
}

CheckResult check_nearly_unstable_curve() {
  const NearlyUnstable spec{1.0, Kernel::exponential(1.0, 1.0), 10.0};
  const auto m = mean_intensity_nearly_unstable(spec, 1e-3);
  double err = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const double t = static_cast<double>(k) * m.dt;
    err = std::max(err, std::abs(m.values[k] - (10.0 - 9.0 * std::exp(-t / 10.0))));
  }
  return {"nearly_unstable_curve", err < 1e-3, fmt("max error %.3g", err)};
}

CheckResult check_completeness(const ModelSpec& spec, double horizon, std::uint64_t seed, std::size_t paths) {
  std::size_t mismatches = 0;
  for (std::size_t r = 0; r < paths; ++r) mismatches += verify_complete(simulate(spec, config_for(seed, 0, r), horizon));
  return {"completeness_rescan", mismatches == 0, std::to_string(mismatches) + " mismatches"};
}

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed, std::size_t reps, int threads) {
  const ModelSpec linear = linear_reference();
  std::vector<CheckResult> out;
  out.push_back(check_divergence_isometry(seed, reps, threads));
  out.push_back(check_martingale(linear, 50.0, seed, reps, threads));
  out.push_back(check_reduced_variance(linear, 50.0, seed, reps, threads));
  out.push_back(check_third_moment(linear, 50.0, seed, reps, threads));
  out.push_back(check_malliavin_domination(linear, {0.25, 0.5, 1.0, 2.0, 4.0}, seed, reps, threads));
  out.push_back(check_malliavin_domination(inhibition_reference(), {0.25, 0.5, 1.0, 2.0, 4.0}, seed, reps, threads));
  out.back().name = "malliavin_domination_inhibition";
  out.push_back(check_comparison(1.0, Kernel::exponential(0.5, 1.0), Link::identity(), 50.0, seed,
                                 std::max<std::size_t>(reps / 10, 10), threads));
  out.push_back(check_completeness(linear, 50.0, seed, 20));
  out.push_back(check_resolvent_closed_form());
  out.push_back(check_nearly_unstable_curve());
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace hawkes_stein
