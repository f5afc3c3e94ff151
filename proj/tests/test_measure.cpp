#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace twl;

namespace {

AtomicMeasure atoms1(std::initializer_list<std::pair<double, double>> xs) {
  AtomicMeasure mu(1);
  for (auto [x, w] : xs) mu.add(Eigen::VectorXd::Constant(1, x), w);
  return mu;
}

Eigen::VectorXd pt(double x) { return Eigen::VectorXd::Constant(1, x); }

}  // namespace

TEST_CASE("cube mass") {
  const GridSpec g = GridSpec::standard(1);
  CHECK(mass(g, atoms1({{0.0, 1.0}}), Cube{0, {0}}) == 1.0);
  CHECK(mass(g, atoms1({{1.0, 1.0}}), Cube{0, {0}}) == 0.0);
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    auto [s, w] = oracle::instance(g, 3, t, 5, 0);
    const Cube q{-1, {rng.below(2)}};
    CHECK(mass(g, s, q) == doctest::Approx(oracle::mass(g, q, s)).epsilon(1e-15));
    CHECK(atoms_in(g, s, q) == oracle::atoms(g, q, s));
  }
}

TEST_CASE("common point masses") {
  CHECK(no_common_point_masses(atoms1({{0.0, 1}}), atoms1({{1.0, 1}})));
  CHECK_FALSE(no_common_point_masses(atoms1({{0.0, 1}, {1.0, 1}}), atoms1({{1.0, 1}})));
  for (int n = 1; n <= 2; ++n) {
    auto [s, w] = oracle::instance(GridSpec::standard(n), 4, 0, 20, 20);
    CHECK(no_common_point_masses(s, w));
  }
}

TEST_CASE("measure validation") {
  CHECK_NOTHROW(atoms1({{0.5, 1.0}, {0.25, 2.0}}).validate());
  CHECK_THROWS(atoms1({{0.5, 0.0}}).validate());
  CHECK_THROWS(atoms1({{0.5, -1.0}}).validate());
  CHECK_THROWS(atoms1({{0.5, 1.0}, {0.5, 2.0}}).validate());
  CHECK_THROWS(AtomicMeasure(1).add(Eigen::VectorXd::Zero(2), 1.0));
  CHECK(atoms1({{0.5, 1.0}}).scaled(3.0).weights[0] == 3.0);
}

TEST_CASE("poisson integrals, closed forms") {
  const GridSpec g = GridSpec::standard(1);
  const Cube q{0, {0}};
  CHECK(poisson(g, q, atoms1({{0.5, 1}}), 0.0) == 1.0);
  CHECK(poisson(g, q, atoms1({{0.5, 1}}), 0.0, PoissonKind::conformal) == 1.0);
  CHECK(poisson(g, q, atoms1({{1.5, 1}}), 0.0) == 0.25);
  CHECK(poisson(g, q, atoms1({{1.5, 1}}), 0.0, PoissonKind::conformal) == 0.25);
  CHECK(poisson_tilde(g, q, atoms1({{0.5, 1}})) == 1.0);
  CHECK(poisson_tilde(g, q, atoms1({{1.5, 1}})) == 0.125);
  CHECK_THROWS(poisson(g, q, atoms1({{0.5, 1}}), 1.0));
  CHECK_THROWS(poisson_tilde(GridSpec::standard(2), Cube{0, {0, 0}}, AtomicMeasure(2)));
}

TEST_CASE("poisson integrals against direct sums") {
  for (int n = 1; n <= 2; ++n) {
    const GridSpec g = GridSpec::standard(n);
    for (int t = 0; t < 30; ++t) {
      auto [s, w] = oracle::instance(g, 11, t, 9, 0);
      Rng rng(100 + t);
      Cube q{-rng.below(6), std::vector<std::int64_t>(n)};
      for (auto& m : q.index) m = rng.below(1 << -q.level);
      const double alpha = n == 2 ? 1.0 : 0.5;
      std::vector<int> all(s.size());
      for (int i = 0; i < s.size(); ++i) all[i] = i;
      CHECK(poisson(g, q, s, alpha) == doctest::Approx(oracle::poisson(g, q, s, all, alpha)).epsilon(1e-13));
      double conf = 0;
      const Eigen::VectorXd c = oracle::centre(g, q);
      const double l = oracle::len(q);
      for (int i = 0; i < s.size(); ++i) {
        const double d = (s.point(i) - c).norm();
        conf += s.weights[i] * std::pow(l / ((l + d) * (l + d)), n - alpha);
      }
      CHECK(poisson(g, q, s, alpha, PoissonKind::conformal) == doctest::Approx(conf).epsilon(1e-13));
      // monotone and homogeneous
      AtomicMeasure more = s;
      more.add(Eigen::VectorXd::Constant(n, 7.0), 0.5);
      CHECK(poisson(g, q, more, alpha) >= poisson(g, q, s, alpha));
      CHECK(poisson(g, q, s.scaled(2.5), alpha) == doctest::Approx(2.5 * poisson(g, q, s, alpha)).epsilon(1e-14));
    }
  }
}

TEST_CASE("half-space poisson extension") {
  CHECK(halfspace_poisson(atoms1({{0.25, 1}}), pt(0.25), 1.0, 0.0) == 1.0);
  CHECK(halfspace_poisson(atoms1({{1.25, 1}}), pt(0.25), 1.0, 0.0) == 0.5);
  CHECK_THROWS(halfspace_poisson(atoms1({{0.25, 1}}), pt(0.25), 0.0, 0.0));

  const GridSpec g = GridSpec::standard(1);
  HalfSpaceMeasure mu(1);
  mu.add(pt(0.5), 1.0, 1.0);
  CHECK(dual_halfspace_poisson(mu, pt(0.5), 0.0, g, Cube{0, {0}}) == 1.0);
  CHECK(dual_halfspace_poisson(mu, pt(0.5), 0.0, g, Cube{0, {1}}) == 0.0);
  CHECK_THROWS(mu.add(pt(0.5), 0.0, 1.0));
  CHECK(in_box(g, Cube{0, {0}}, pt(0.5), 1.0));
  CHECK_FALSE(in_box(g, Cube{0, {0}}, pt(0.5), 1.5));
}
