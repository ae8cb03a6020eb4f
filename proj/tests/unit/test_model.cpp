#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "hawkes_stein/model.hpp"

using namespace hawkes_stein;
using boost::math::quadrature::gauss_kronrod;

namespace {

double numeric_l1(const Kernel& k, double upper) {
  return gauss_kronrod<double, 61>::integrate([&](double t) { return std::abs(k(t)); }, 0.0, upper, 20, 1e-12);
}

double numeric_m1(const Kernel& k, double upper) {
  return gauss_kronrod<double, 61>::integrate([&](double t) { return t * std::abs(k(t)); }, 0.0, upper, 20,
                                              1e-12);
}

}  // namespace

TEST_CASE("kernel norms and first moments agree with quadrature") {
  const Kernel e = Kernel::exponential(0.5, 2.0);
  CHECK(e(0.0) == doctest::Approx(1.0));
  CHECK(e.l1_norm() == doctest::Approx(0.5));
  CHECK(e.first_moment() == doctest::Approx(0.25));
  CHECK(numeric_l1(e, 60.0) == doctest::Approx(e.l1_norm()).epsilon(1e-10));

  const Kernel p = Kernel::power_law(0.4, 1.5, 3.5);
  CHECK(numeric_l1(p, 1e7) == doctest::Approx(p.l1_norm()).epsilon(1e-6));
  CHECK(numeric_m1(p, 1e7) == doctest::Approx(p.first_moment()).epsilon(1e-3));

  const Kernel c = Kernel::compact_polynomial(0.7, 3.0, 2.0);
  CHECK(c(3.5) == 0.0);
  CHECK(c.support().value() == 3.0);
  CHECK(numeric_l1(c, 3.0) == doctest::Approx(c.l1_norm()).epsilon(1e-10));
  CHECK(numeric_m1(c, 3.0) == doctest::Approx(c.first_moment()).epsilon(1e-10));

  const Kernel t = Kernel::tabulated(0.5, {1.0, -0.5, 0.25, 0.0});
  CHECK(t(0.25) == doctest::Approx(0.25));
  CHECK_FALSE(t.non_negative());
  CHECK(numeric_l1(t, 1.5) == doctest::Approx(t.l1_norm()).epsilon(1e-8));
}

TEST_CASE("kernel integrals, tails and bounds") {
  const Kernel e = Kernel::exponential(0.5, 1.0);
  CHECK(e.integral(1.0, 3.0) == doctest::Approx(0.5 * (std::exp(-1.0) - std::exp(-3.0))));
  CHECK(e.tail_l1(2.0) == doctest::Approx(0.5 * std::exp(-2.0)));
  CHECK(e.sup_on(1.0, 2.0) == doctest::Approx(e(1.0)));
  CHECK(e.inf_on(1.0, 2.0) == doctest::Approx(e(2.0)));
  CHECK(std::abs(e(e.effective_support(1e-12))) <= 1e-12 * 0.5 * 1.0001);
  CHECK(e.scaled(2.0).l1_norm() == doctest::Approx(1.0));
  const auto form = e.exponential_form();
  REQUIRE(form);
  CHECK(form->amplitude == doctest::Approx(0.5));
  CHECK_FALSE(Kernel::power_law(0.4, 1.5, 3.5).exponential_form());
  CHECK_THROWS_AS(Kernel::power_law(0.4, 1.5, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(Kernel::exponential(0.5, -1.0), std::invalid_argument);
}

TEST_CASE("links: values, Lipschitz constants and linear pieces") {
  CHECK(Link::identity()(-2.0) == -2.0);
  CHECK(Link::positive_part()(-2.0) == 0.0);
  const Link a = Link::affine_clipped(1.0, 2.0, 4.0);
  CHECK(a(-3.0) == 0.0);
  CHECK(a(0.5) == 2.0);
  CHECK(a(10.0) == 4.0);
  CHECK(a.lipschitz() == 2.0);
  const Link s = Link::sigmoid(2.0, 3.0);
  CHECK(s(0.0) == doctest::Approx(1.0));
  CHECK(s.lipschitz() == doctest::Approx(1.5));
  CHECK(s.linear_pieces().empty());
  for (const auto& link : {a, Link::positive_part(), Link::tabulated(-1.0, 0.5, {0.0, 1.0, 1.5, 1.0})}) {
    const auto pieces = link.linear_pieces();
    REQUIRE_FALSE(pieces.empty());
    for (const auto& p : pieces) {
      const double lo = std::isfinite(p.x_lo) ? p.x_lo : p.x_hi - 5.0;
      const double hi = std::isfinite(p.x_hi) ? p.x_hi : lo + 5.0;
      for (double x : {lo, 0.5 * (lo + hi), hi}) CHECK(link(x) == doctest::Approx(p.slope * x + p.intercept));
    }
  }
  CHECK(Link::tabulated(-1.0, 0.5, {0.0, 1.0, 1.5, 1.0}).monotonicity() == Monotonicity::None);
  CHECK(a.sup_on(-1.0, 0.5) >= 2.0);
}

TEST_CASE("discrete kernels") {
  const auto g = DiscreteKernel::truncated_geometric(0.3, 0.5, 40);
  CHECK(g(1) == doctest::Approx(0.3));
  CHECK(g(41) == 0.0);
  CHECK(g.total() == doctest::Approx(0.6).epsilon(1e-10));
  const auto f = DiscreteKernel::finite({0.2, 0.1});
  CHECK(f.total() == doctest::Approx(0.3));
  CHECK(f.first_moment() == doctest::Approx(0.4));
  CHECK(DiscreteKernel::geometric(0.3, 0.5).first_moment() == doctest::Approx(1.2));
}

TEST_CASE("validation flags supercritical and inadmissible specs") {
  CHECK(validate(EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::identity()}).empty());
  CHECK_FALSE(validate(EmptyHistory{1.0, Kernel::exponential(1.2, 1.0), Link::identity()}).empty());
  CHECK_FALSE(validate(EmptyHistory{1.0, Kernel::exponential(-0.5, 1.0), Link::identity()}).empty());
  CHECK(validate(EmptyHistory{1.0, Kernel::exponential(-0.5, 1.0), Link::positive_part()}).empty());
  CHECK_FALSE(validate(Discrete{1.0, DiscreteKernel::finite({0.7, 0.5})}).empty());
  CHECK_FALSE(validate(NearlyUnstable{1.0, Kernel::exponential(0.9, 1.0), 10.0}).empty());
  CHECK(validate(NearlyUnstable{1.0, Kernel::exponential(1.0, 1.0), 10.0}).empty());
  CHECK_FALSE(validate(LocallyStationary{Profile::affine(1.0, 0.5), Profile::affine(0.8, 0.4),
                                         Kernel::exponential(1.0, 1.0)})
                   .empty());
}

TEST_CASE("burn-in tail mass is below tolerance") {
  const Kernel e = Kernel::exponential(0.5, 1.0);
  const double b = default_burn_in(e, Link::identity(), 1e-6);
  CHECK(e.tail_l1(b) <= 1e-6 * 1.0001);
  CHECK(e.tail_l1(0.99 * b) > 1e-6);
}

TEST_CASE("derived constants") {
  const auto lin = derived_constants(EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::identity()});
  CHECK(*lin.sigma2_target == doctest::Approx(2.0));
  const auto d = derived_constants(Discrete{1.0, DiscreteKernel::truncated_geometric(0.3, 0.5, 40)});
  CHECK(*d.sigma2_target == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(*d.raw_count_variance == doctest::Approx(15.625).epsilon(1e-9));
  const auto ls = derived_constants(
      LocallyStationary{Profile::affine(1.0, 0.5), Profile::affine(0.4, 0.2), Kernel::exponential(1.0, 1.0)});
  const double oracle = gauss_kronrod<double, 15>::integrate(
      [](double x) { return (1.0 + 0.5 * x) / (0.6 - 0.2 * x); }, 0.0, 1.0, 30, 1e-14);
  CHECK(*ls.sigma2_target == doctest::Approx(oracle).epsilon(1e-12));
  const auto self = derived_constants(EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::identity()},
                                      Normalization::SelfG);
  CHECK(*self.sigma2_target == 1.0);
  const auto sig = derived_constants(EmptyHistory{1.0, Kernel::exponential(0.5, 1.0), Link::sigmoid(2.0)});
  CHECK(sig.estimate_by_simulation);
  CHECK_THROWS_AS(derived_constants(EmptyHistory{1.0, Kernel::exponential(1.5, 1.0), Link::identity()}),
                  std::invalid_argument);
}
