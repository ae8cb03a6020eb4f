#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hawkes_stein/simulate.hpp"

using namespace hawkes_stein;

namespace {

Configuration config(std::uint64_t seed) { return Configuration(DrivingMeasure(seed)); }

const ModelSpec kLinear = EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::identity()};

}  // namespace

TEST_CASE("paths are deterministic functions of the configuration") {
  const auto a = simulate(kLinear, config(4), 60.0), b = simulate(kLinear, config(4), 60.0);
  CHECK(a.events() == b.events());
  CHECK(a.events() != simulate(kLinear, config(5), 60.0).events());
}

TEST_CASE("accepted atoms are exactly the atoms under the intensity") {
  const std::vector<ModelSpec> specs{
      kLinear,
      EmptyHistory{1.0, Kernel::exponential(-0.8, 2.0), Link::positive_part()},
      EmptyHistory{0.5, Kernel::power_law(0.6, 1.0, 3.0), Link::identity()},
      EmptyHistory{0.0, Kernel::compact_polynomial(1.5, 2.0, 1.0), Link::sigmoid(2.0, 1.0)},
      EmptyHistory{1.0, Kernel::tabulated(0.25, {0.4, 0.2, -0.3, 0.1}), Link::affine_clipped(0.2, 1.0, 5.0)},
      Stationaryized{1.0, Kernel::exponential(0.5, 1.0), Link::identity(), 30.0},
      LocallyStationary{Profile::affine(1.0, 0.5), Profile::affine(0.4, 0.2), Kernel::exponential(1.0, 1.0)},
      NearlyUnstable{1.0, Kernel::exponential(1.0, 1.0), 20.0},
  };
  for (std::size_t s = 0; s < specs.size(); ++s) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto p = simulate(specs[s], config(seed * 31 + s), 40.0);
      CAPTURE(variant_name(specs[s]));
      CAPTURE(s);
      CHECK(verify_complete(p) == 0);
      for (const auto& e : p.events()) CHECK(e.theta <= p.intensity(e.t));
    }
  }
}

TEST_CASE("stationaryized paths start at minus the burn-in") {
  const auto p = simulate(Stationaryized{1.0, Kernel::exponential(0.5, 1.0), Link::identity(), 25.0}, config(2), 30.0);
  CHECK(p.start() == -25.0);
  CHECK(p.count() == p.events().size() - p.events_before(0.0));
}

TEST_CASE("linear mean count matches the renewal equation") {
  const double T = 100.0;
  const int n = 2000;
  double s = 0.0, s2 = 0.0;
  for (int r = 0; r < n; ++r) {
    const auto c = static_cast<double>(simulate(kLinear, config(100 + r), T).count());
    s += c;
    s2 += c * c;
  }
  const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - (2.0 * T - 2.0 * (1.0 - std::exp(-T / 2.0)))) < 4.0 * se);
}

TEST_CASE("closed-form intensity integrals agree with adaptive quadrature") {
  const auto p = simulate(kLinear, config(9), 50.0);
  CHECK(compensator(p) == doctest::Approx(compensator(p, Quadrature::Adaptive)).epsilon(1e-10));
  CHECK(integral_sqrt_intensity(p) == doctest::Approx(integral_sqrt_intensity(p, Quadrature::Adaptive)).epsilon(1e-10));
  CHECK(integral_inv_sqrt_intensity(p) ==
        doctest::Approx(integral_inv_sqrt_intensity(p, Quadrature::Adaptive)).epsilon(1e-10));
}

TEST_CASE("kinked links: closed-form compensator against a fine midpoint rule") {
  const std::vector<ModelSpec> specs{
      EmptyHistory{1.0, Kernel::exponential(-0.8, 2.0), Link::positive_part()},
      EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::affine_clipped(0.3, 1.5, 4.0)}};
  for (const auto& spec : specs) {
    const auto p = simulate(spec, config(8), 30.0);
    std::vector<double> cuts{0.0};
    for (const auto& e : p.events()) cuts.push_back(e.t);
    cuts.push_back(30.0);
    double midpoint = 0.0;
    const int n = 20000;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double h = (cuts[k + 1] - cuts[k]) / n;
      for (int i = 0; i < n; ++i) midpoint += h * p.intensity(cuts[k] + (i + 0.5) * h);
    }
    CHECK(compensator(p) == doctest::Approx(midpoint).epsilon(1e-8));
    CHECK(compensator(p, Quadrature::Adaptive) == doctest::Approx(compensator(p)).epsilon(1e-7));
  }
}

TEST_CASE("poisson special case: zero kernel accepts atoms under mu") {
  const ModelSpec poisson = EmptyHistory{2.5, Kernel(), Link::identity()};
  const auto c = config(12);
  const auto p = simulate(poisson, c, 20.0);
  CHECK(p.events() == c.atoms_in(0.0, 20.0, 2.5));
  CHECK(compensator(p) == doctest::Approx(50.0));
}

TEST_CASE("coupled paths differ by the shift atom and its offspring") {
  const auto c = config(77);
  const auto beyond = simulate_coupled(kLinear, c, 30.0, {35.0, 0.0});
  CHECK(beyond.base.events() == beyond.shifted.events());
  const auto pair = simulate_coupled(kLinear, c, 30.0, {10.0, 0.0});
  const auto& s = pair.shifted.events();
  CHECK(std::find(s.begin(), s.end(), Atom{10.0, 0.0}) != s.end());
  const auto k = pair.base.events_before(10.0);
  CHECK(std::equal(pair.base.events().begin(), pair.base.events().begin() + static_cast<std::ptrdiff_t>(k), s.begin()));
  CHECK(pair.shifted.count() >= pair.base.count());
  CHECK(verify_complete(pair.shifted) == 0);
  CHECK_THROWS_AS(simulate_coupled(kLinear, c, 30.0, {10.0, 0.5}), std::invalid_argument);
}

TEST_CASE("resuming on the same configuration reproduces the path") {
  const auto c = config(31);
  const auto p = simulate(kLinear, c, 50.0);
  const auto q = simulate_resumed(p, c, 17.3);
  CHECK(p.events() == q.events());
}

TEST_CASE("ceiling overflow is reported") {
  SimulationOptions o;
  o.max_ceiling = 1.5;
  CHECK_THROWS_AS(simulate(kLinear, config(1), 50.0, o), CeilingOverflow);
}

TEST_CASE("curve thinning against a constant curve") {
  const auto curve = std::make_shared<const GridFunction>(GridFunction{1.0, std::vector<double>(11, 1.7)});
  const auto c = config(3);
  CHECK(simulate_curve(curve, c, 10.0).events == c.atoms_in(0.0, 10.0, 1.7));
  CHECK_THROWS_AS(simulate_curve(curve, c, 12.0), std::invalid_argument);
}

TEST_CASE("discrete paths") {
  const Discrete spec{1.0, DiscreteKernel::truncated_geometric(0.3, 0.5, 40)};
  const auto a = simulate_discrete(spec, 100, 5), b = simulate_discrete(spec, 100, 5);
  CHECK(a.counts == b.counts);
  CHECK(a.intensities.front() == 1.0);
  double x = 0.0;
  for (int j = 1; j <= 4; ++j) x += spec.alphas(j) * static_cast<double>(a.counts[4 - j]);
  CHECK(a.intensities[4] == doctest::Approx(1.0 + x));
  const int n = 4000;
  double late = 0.0;
  for (int r = 0; r < n; ++r) late += static_cast<double>(simulate_discrete(spec, 200, 1000 + r).counts.back());
  CHECK(late / n == doctest::Approx(2.5).epsilon(0.05));
}
