#include <doctest.h>

#include <cmath>

#include "hawkes_stein/functionals.hpp"
#include "hawkes_stein/philox.hpp"

using namespace hawkes_stein;

namespace {

Configuration config(std::uint64_t seed) { return Configuration(DrivingMeasure(seed)); }

const ModelSpec kLinear = EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::identity()};
const ModelSpec kPoisson = EmptyHistory{2.0, Kernel(), Link::identity()};

}  // namespace

TEST_CASE("poisson functionals reduce to normalized counts") {
  const double T = 30.0;
  const auto p = simulate(kPoisson, config(6), T);
  const double n = static_cast<double>(p.count());
  CHECK(functional_standard(p) == doctest::Approx((n - 2.0 * T) / std::sqrt(T)));
  CHECK(functional_reduced(p) == doctest::Approx((n - 2.0 * T) / std::sqrt(2.0 * T)));

  const auto curve = std::make_shared<const GridFunction>(GridFunction{0.5, std::vector<double>(61, 2.0)});
  const auto q = simulate_curve(curve, config(6), T);
  CHECK(functional_nearly(q, *curve) == doctest::Approx((static_cast<double>(q.events.size()) - 2.0 * T) / std::sqrt(2.0 * T)));
  const GridFunction other{0.5, std::vector<double>(61, 3.0)};
  CHECK_THROWS_AS(functional_nearly(q, other), std::invalid_argument);
}

TEST_CASE("reduced functional needs a positive intensity floor") {
  const auto p = simulate(EmptyHistory{1.0, Kernel::exponential(-0.5, 1.0), Link::positive_part()}, config(1), 20.0);
  CHECK_THROWS_AS(functional_reduced(p), std::invalid_argument);
}

TEST_CASE("functional samples: moments and standard errors") {
  FunctionalSample s;
  s.values = {1.0, 2.0, 3.0, 4.0};
  CHECK(s.mean() == 2.5);
  CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
  CHECK(s.standard_error() == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(s.variance_standard_error() > 0.0);
}

TEST_CASE("reduced functional is centred with unit variance") {
  FunctionalSample s;
  for (int r = 0; r < 3000; ++r) s.values.push_back(functional_reduced(simulate(kLinear, config(500 + r), 40.0)));
  CHECK(std::abs(s.mean()) < 4.0 * s.standard_error());
  CHECK(std::abs(s.variance() - 1.0) < 4.0 * s.variance_standard_error());
}

TEST_CASE("discrete functionals") {
  const Discrete none{1.5, DiscreteKernel::finite({0.0})};
  const auto p = simulate_discrete(none, 400, 3);
  const double H = static_cast<double>(p.total());
  CHECK(functional_discrete(p, DiscreteMode::Martingale, none) == doctest::Approx((H - 600.0) / 20.0));
  CHECK(functional_discrete(p, DiscreteMode::RawCount, none) == doctest::Approx((H - 600.0) / 20.0));

  const Discrete spec{1.0, DiscreteKernel::truncated_geometric(0.3, 0.5, 40)};
  double sum = 0.0, sum2 = 0.0;
  const int n = 2000;
  for (int r = 0; r < n; ++r) {
    const auto q = simulate_discrete(spec, 256, 40 + r);
    const double e = discrete_residual(q, spec);
    CHECK(e >= -1e-9);
    sum += e;
    sum2 += e * e;
  }
  const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
  CHECK(mean <= (1.0 + spec.alphas.first_moment()) * 2.5 + 4.0 * se);
}

TEST_CASE("malliavin derivative bookkeeping") {
  const auto c = config(19);
  const double T = 40.0;
  CHECK(malliavin_derivative(kLinear, c, T, 45.0, FunctionalTag::Standard) == 0.0);
  const auto pair = simulate_coupled(kLinear, c, T, {12.5, 0.0});
  const double extra = static_cast<double>(pair.shifted.count()) - static_cast<double>(pair.base.count()) - 1.0;
  CHECK(extra >= 0.0);
  const double d_comp = compensator(pair.shifted, Quadrature::Adaptive) - compensator(pair.base, Quadrature::Adaptive);
  const double direct = malliavin_derivative(kLinear, c, T, 12.5, FunctionalTag::Standard);
  CHECK(direct == doctest::Approx((1.0 + extra - d_comp) / std::sqrt(T)).epsilon(1e-10));
}

TEST_CASE("bound terms: structural zeros") {
  BoundOptions o;
  o.t_subsample = 4;
  o.seed = 5;
  const auto unit = bound_terms(kLinear, 30.0, 20, Normalization::UnitG, o);
  REQUIRE(unit.part2.size() == 5);
  for (std::size_t k = 2; k < 5; ++k) {
    CHECK(unit.part2[k].exact_zero);
    CHECK(unit.part2[k].mean == 0.0);
  }
  CHECK(unit.part3.empty());
  CHECK(unit.part2[0].mean > 0.0);

  const auto flat = bound_terms(kPoisson, 30.0, 20, Normalization::SelfG, o);
  REQUIRE(flat.part3.size() == 4);
  for (std::size_t k = 2; k < 5; ++k) CHECK(flat.part2[k].mean == 0.0);
  for (std::size_t k = 1; k < 4; ++k) CHECK(flat.part3[k].mean == 0.0);

  o.max_events = 10.0;
  CHECK_THROWS_AS(bound_terms(kLinear, 30.0, 20, Normalization::UnitG, o), BudgetExceeded);
}
