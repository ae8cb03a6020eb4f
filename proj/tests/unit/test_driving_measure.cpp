#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "hawkes_stein/driving_measure.hpp"

using namespace hawkes_stein;

TEST_CASE("cells are pure functions of (seed, i, j)") {
  const DrivingMeasure a(17), b(17), c(18);
  CHECK(a.cell_atoms({3, 2}) == b.cell_atoms({3, 2}));
  CHECK(a.cell_atoms({-4, 0}) == b.cell_atoms({-4, 0}));
  bool differs = false;
  for (int i = 0; i < 20; ++i) differs = differs || a.cell_atoms({i, 0}) != c.cell_atoms({i, 0});
  CHECK(differs);
  for (const auto& x : a.cell_atoms({3, 2})) {
    CHECK(x.t >= 3.0);
    CHECK(x.t < 4.0);
    CHECK(x.theta >= 2.0);
    CHECK(x.theta < 3.0);
  }
  CHECK(a.cell_count({3, 2}) == a.cell_atoms({3, 2}).size());
}

TEST_CASE("cell counts have unit mean and variance") {
  const DrivingMeasure m(5);
  const int n = 40000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<double>(m.cell_count({i, i % 7}));
    s += k;
    s2 += k * k;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean - 1.0) < 5.0 / std::sqrt(n));
  CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(3.0 / n));
}

TEST_CASE("atoms_in is the sorted union of the overlapping cells, clipped") {
  const DrivingMeasure m(99);
  const auto atoms = m.atoms_in(1.5, 6.25, 2.5);
  CHECK(std::is_sorted(atoms.begin(), atoms.end(), atom_before));
  std::size_t expected = 0;
  for (std::int64_t i = 1; i <= 6; ++i) {
    for (std::int64_t j = 0; j <= 2; ++j) {
      for (const auto& a : m.cell_atoms({i, j})) expected += a.t >= 1.5 && a.t < 6.25 && a.theta <= 2.5;
    }
  }
  CHECK(atoms.size() == expected);
  CHECK(m.strips_for(2.5) == 3);
  CHECK(m.strips_for(0.0) == 1);
  CHECK(m.time_cell(-0.5) == -1);
}

TEST_CASE("shift adds one atom and is idempotent on repeats") {
  const Configuration base(DrivingMeasure(3));
  const Atom p{2.25, 0.5};
  const Configuration s = shift(base, p);
  const auto before = base.atoms_in(0.0, 5.0, 1.0);
  const auto after = s.atoms_in(0.0, 5.0, 1.0);
  CHECK(after.size() == before.size() + 1);
  CHECK(std::find(after.begin(), after.end(), p) != after.end());
  CHECK(shift(s, p) == s);
  CHECK_FALSE(s == base);
  CHECK_THROWS_AS(shift(base, Atom{1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("divergence of a step integrand counts atoms minus area") {
  const Configuration c(DrivingMeasure(21));
  const auto u = step_integrand({{0.0, 3.0, 0.0, 2.0, 1.5}});
  const double count = static_cast<double>(c.atoms_in(0.0, 3.0, 2.0).size());
  CHECK(divergence(c, u, 10.0) == doctest::Approx(1.5 * count - 1.5 * 6.0));
  PredictableIntegrand unbounded{[](const Atom&) { return 1.0; }, std::nullopt, [](double t) { return t; }};
  CHECK_THROWS_AS(divergence(c, unbounded, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(step_integrand({{2.0, 1.0, 0.0, 1.0, 1.0}}), std::invalid_argument);
}

TEST_CASE("divergences are centred and orthogonal after time t") {
  const auto u = step_integrand({{0.0, 4.0, 0.0, 1.0, 1.0}, {1.0, 3.0, 1.0, 2.0, -0.5}});
  const auto v = step_integrand({{2.0, 4.0, 0.5, 1.5, 2.0}});
  const double expected_cov = 2.0 * 0.5 * 2.0 + 1.0 * 0.5 * (-0.5) * 2.0;
  const int n = 20000;
  double su = 0.0, sv = 0.0, suv = 0.0;
  std::vector<double> prod(n);
  for (int r = 0; r < n; ++r) {
    const Configuration c(DrivingMeasure(1000 + r));
    const double a = divergence(c, u, 4.0), b = divergence(c, v, 4.0);
    su += a;
    sv += b;
    suv += a * b;
    prod[r] = a * b;
  }
  double var = 0.0;
  for (double x : prod) var += (x - suv / n) * (x - suv / n);
  const double se = std::sqrt(var / (n - 1.0) / n);
  CHECK(std::abs(su / n) < 4.0 * std::sqrt(4.5 / n));
  CHECK(std::abs(suv / n - expected_cov) < 4.0 * se);
}
