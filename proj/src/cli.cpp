#include "hawkes_stein/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "hawkes_stein/functionals.hpp"
#include "hawkes_stein/parallel.hpp"
#include "hawkes_stein/philox.hpp"
#include "hawkes_stein/simulate.hpp"
#include "hawkes_stein/volterra.hpp"

namespace hawkes_stein {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Csv {
 public:
  Csv(const fs::path& path, const std::string& header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }

  template <class... Cols>
  void row(const Cols&... cols) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cols), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double x) { return format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I i) {
    return std::to_string(i);
  }

  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, const ExperimentConfig& c, bool partial,
                    const std::vector<std::string>& artifacts) {
  json m{{"command", command},
         {"version", kVersion},
         {"config_hash", hex(config_hash(c))},
         {"seed", c.seed},
         {"replications", c.replications},
         {"seed_derivation", "philox4x32-10 mix of (seed, horizon index, replication index)"},
         {"partial", partial},
         {"artifacts", artifacts},
         {"config", config_to_json(c)}};
  write_json(dir / "manifest.json", m);
}

SweepOptions sweep_options(const ExperimentConfig& c, const Deadline& deadline) {
  SweepOptions o;
  o.horizons = c.horizons;
  o.reps = c.replications;
  o.bootstrap = c.bootstrap;
  o.bootstrap_seed = mix64(c.seed ^ 0x9e3779b97f4a7c15ull);
  o.threads = c.threads;
  o.deadline = &deadline;
  return o;
}

void write_functionals(const fs::path& dir, const SweepResult& r) {
  Csv csv(dir / "functionals.csv", "rep,horizon,value");
  for (const auto& h : r.horizons) {
    for (std::size_t k = 0; k < h.sample.values.size(); ++k) csv.row(k, h.horizon, h.sample.values[k]);
  }
}

void write_summary(const fs::path& dir, const SweepResult& r) {
  Csv csv(dir / "summary.csv", "horizon,n_reps,mean,mean_se,variance,variance_se,sigma2,dw,se,floor");
  for (const auto& h : r.horizons) {
    csv.row(h.horizon, h.sample.values.size(), h.sample.mean(), h.sample.standard_error(), h.sample.variance(),
            h.sample.variance_standard_error(), r.sigma2, h.dw, h.se, h.floor);
  }
}

int simulate_command(const ExperimentConfig& c, const fs::path& dir, std::ostream& log) {
  const double horizon = c.horizons.front();
  const ModelSpec spec = build_model(c.model, horizon);
  std::vector<std::string> artifacts;
  auto config_for = [&](std::size_t r) { return Configuration(DrivingMeasure(derive_seed(c.seed, 0, r))); };
  if (const auto* d = std::get_if<Discrete>(&spec)) {
    Csv csv(dir / "counts.csv", "rep,step,count,intensity");
    const auto n = static_cast<std::size_t>(std::llround(horizon));
    for (std::size_t r = 0; r < c.replications; ++r) {
      const auto p = simulate_discrete(*d, n, derive_seed(c.seed, 0, r));
      for (std::size_t k = 0; k < p.counts.size(); ++k) csv.row(r, k + 1, p.counts[k], p.intensities[k]);
    }
    artifacts.push_back("counts.csv");
  } else if (c.normalization == Normalization::DeterministicG) {
    const auto curve = std::make_shared<const GridFunction>(
        mean_intensity_nearly_unstable(std::get<NearlyUnstable>(spec), c.curve_dt));
    Csv csv(dir / "events.csv", "rep,t,theta");
    for (std::size_t r = 0; r < c.replications; ++r) {
      for (const auto& a : simulate_curve(curve, config_for(r), horizon).events) csv.row(r, a.t, a.theta);
    }
    artifacts.push_back("events.csv");
  } else {
    Csv csv(dir / "events.csv", "rep,t,theta");
    const auto paths = parallel_map<std::vector<Atom>>(
        c.replications,
        [&](std::size_t r) {
          const EventPath p = simulate(spec, config_for(r), horizon);
          return std::vector<Atom>(p.events().begin() + static_cast<std::ptrdiff_t>(p.events_before(0.0)),
                                   p.events().end());
        },
        c.threads);
    for (std::size_t r = 0; r < paths.size(); ++r) {
      for (const auto& a : paths[r]) csv.row(r, a.t, a.theta);
    }
    artifacts.push_back("events.csv");
  }
  write_manifest(dir, "simulate", c, false, artifacts);
  log << "simulated " << c.replications << " paths at horizon " << format_double(horizon) << " -> " << dir.string()
      << '\n';
  return kExitOk;
}

int resolvent_command(const ExperimentConfig& c, const fs::path& dir, std::ostream& log) {
  const Kernel kernel = build_kernel(c.model.kernel);
  const auto& rc = c.resolvent;
  if (!(rc.dt > 0.0) || !(rc.horizon > 0.0)) throw ConfigError("resolvent: horizon and dt must be > 0");
  if (!(rc.alpha * kernel.l1_norm() < 1.0)) {
    throw ModelViolation("resolvent: alpha * ||phi||_1 = " + format_double(rc.alpha * kernel.l1_norm()) + " >= 1");
  }
  const auto psi = resolvent(kernel, rc.alpha, rc.horizon, rc.dt);
  Csv csv(dir / "resolvent.csv", "t,psi");
  for (std::size_t k = 0; k < psi.base.size(); ++k) csv.row(static_cast<double>(k) * psi.base.dt, psi.base.values[k]);
  write_manifest(dir, "resolvent", c, false, {"resolvent.csv"});
  log << "int_0^H psi = " << format_double(psi.base.trapezoid())
      << ", tail bound = " << format_double(psi.l1_tail_bound) << '\n';
  return kExitOk;
}

void write_bounds(const fs::path& dir, const ExperimentConfig& c, const SweepResult& r, const Deadline& deadline,
                  std::ostream& log) {
  Csv csv(dir / "bound.csv", "horizon,part,term,mean,se,exact_zero");
  for (std::size_t h = 0; h < r.horizons.size(); ++h) {
    deadline.check();
    const double horizon = r.horizons[h].horizon;
    BoundOptions o;
    o.t_subsample = c.bound->t_subsample;
    o.seed = derive_seed(c.seed ^ 0xb0b0b0b0b0b0b0b0ull, h, 0);
    o.sigma2 = r.sigma2;
    const auto terms = bound_terms(build_model(c.model, horizon), horizon, c.bound->reps, c.normalization, o);
    for (const auto& t : terms.part2) csv.row(horizon, "2", t.name, t.mean, t.se, t.exact_zero ? 1 : 0);
    for (const auto& t : terms.part3) csv.row(horizon, "3", t.name, t.mean, t.se, t.exact_zero ? 1 : 0);
    log << "T=" << format_double(horizon) << " bound total " << format_double(terms.total_part2()) << " vs dW "
        << format_double(r.horizons[h].dw) << '\n';
  }
}

int sweep_command(const std::string& command, const ExperimentConfig& c, const fs::path& dir, std::ostream& log) {
  const Deadline deadline(c.budget);
  const Pipeline pipeline = make_pipeline(c);
  const SweepResult r = run_sweep(pipeline, sweep_options(c, deadline));
  bool partial = r.partial;
  std::vector<std::string> artifacts{"functionals.csv"};
  write_functionals(dir, r);
  if (command == "dw") {
    write_summary(dir, r);
    artifacts.push_back("summary.csv");
    if (c.bound && !partial) {
      const bool supported = c.model.variant != "discrete" && c.normalization != Normalization::DeterministicG;
      if (!supported) {
        log << "bound terms are available for continuous unit or self normalizations only; skipped\n";
      } else {
        try {
          write_bounds(dir, c, r, deadline, log);
          artifacts.push_back("bound.csv");
        } catch (const BudgetExceeded& e) {
          log << e.what() << '\n';
          partial = true;
        }
      }
    }
    for (const auto& h : r.horizons) {
      log << "T=" << format_double(h.horizon) << " dW=" << format_double(h.dw) << " se=" << format_double(h.se)
          << '\n';
    }
  } else {
    Csv csv(dir / "rate.csv", "horizon,dw,se,n_reps");
    for (const auto& h : r.horizons) csv.row(h.horizon, h.dw, h.se, h.sample.values.size());
    json verdict{{"functional", pipeline.functional},
                 {"sigma2", r.sigma2},
                 {"sigma2_estimated", r.sigma2_estimated},
                 {"partial", partial},
                 {"floor_ok", r.floor_ok()},
                 {"decreasing", decreasing_beyond(r)}};
    if (r.fit) {
      verdict["slope"] = r.fit->slope;
      verdict["slope_se"] = r.fit->slope_se;
      verdict["intercept"] = r.fit->intercept;
      verdict["weighted"] = r.fit->weighted;
      verdict["slope_in_range"] = r.fit->slope >= -0.7 && r.fit->slope <= -0.3;
      log << "slope " << format_double(r.fit->slope) << " +- " << format_double(r.fit->slope_se) << '\n';
    } else {
      verdict["slope"] = nullptr;
      log << "fewer than 3 horizons completed, no slope\n";
    }
    write_json(dir / "rate.json", verdict);
    artifacts.push_back("rate.csv");
    artifacts.push_back("rate.json");
  }
  write_manifest(dir, command, c, partial, artifacts);
  if (partial) {
    log << "budget exceeded, partial results in " << dir.string() << '\n';
    return kExitBudget;
  }
  return kExitOk;
}

int check_command(const ExperimentConfig& c, const fs::path& dir, std::ostream& log) {
  const auto results = run_invariant_suite(c.seed, c.replications, c.threads);
  Csv csv(dir / "check.csv", "invariant,pass,detail");
  bool all = true;
  for (const auto& r : results) {
    log << (r.pass ? "PASS " : "FAIL ") << r.name << "  " << r.detail << '\n';
    csv.row(r.name, r.pass ? 1 : 0, "\"" + r.detail + "\"");
    all = all && r.pass;
  }
  write_manifest(dir, "check", c, false, {"check.csv"});
  return all ? kExitOk : kExitFailure;
}

}  // namespace

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig c = o.config_path ? load_config(*o.config_path) : ExperimentConfig{};
  if (o.seed) c.seed = *o.seed;
  if (o.reps) {
    if (*o.reps < 2) throw ConfigError("--reps must be >= 2");
    c.replications = *o.reps;
  }
  if (o.threads) c.threads = *o.threads;
  if (o.out) c.output_dir = *o.out;
  if (o.budget) {
    if (*o.budget < 0.0) throw ConfigError("--budget must be >= 0");
    c.budget = *o.budget;
  }
  return c;
}

int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& log) {
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  if (command == "simulate") return simulate_command(config, dir, log);
  if (command == "resolvent") return resolvent_command(config, dir, log);
  if (command == "dw" || command == "rate") return sweep_command(command, config, dir, log);
  if (command == "check") return check_command(config, dir, log);
  throw ConfigError("unknown command '" + command + "'");
}

int run_cli(const std::string& command, const Overrides& o, std::ostream& log) {
  try {
    return run_command(command, resolve_config(o), log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ModelViolation& e) {
    log << "model violation: " << e.what() << '\n';
    return kExitModel;
  } catch (const CeilingOverflow& e) {
    log << "model violation: " << e.what() << '\n';
    return kExitModel;
  } catch (const BudgetExceeded& e) {
    log << "budget exceeded: " << e.what() << '\n';
    return kExitBudget;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace hawkes_stein
