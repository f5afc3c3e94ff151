#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "twl/io.hpp"

using namespace twl;

namespace {

Eigen::VectorXd pt(double x) { return Eigen::VectorXd::Constant(1, x); }

RunConfig small_config() {
  RunConfig c;
  c.pairs = 4;
  c.peculiar_trials = 40;
  c.sigma_atoms = 8;
  c.omega_atoms = 8;
  return c;
}

}  // namespace

TEST_CASE("streams are reproducible and independent") {
  Rng a = Rng::stream(5, {1, 2}), b = Rng::stream(5, {1, 2}), c = Rng::stream(5, {2, 1});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.raw(), y = b.raw(), z = c.raw();
    CHECK(x == y);
    differs |= x != z;
  }
  CHECK(differs);
  Rng r(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.log_uniform(1e-2, 1e2);
    CHECK(u >= 1e-2);
    CHECK(u <= 1e2);
    const int k = r.below(7);
    CHECK(k >= 0);
    CHECK(k < 7);
  }
}

TEST_CASE("generators") {
  for (int t = 0; t < 40; ++t) {
    const GridSpec g = GridSpec::standard(1 + t % 2);
    for (bool clustered : {false, true}) {
      auto [s, w] = oracle::instance(g, 401, t, 20, 30, clustered);
      CHECK(s.size() == 20);
      CHECK(w.size() == 30);
      std::set<std::vector<double>> seen;
      for (const AtomicMeasure* mu : {&s, &w}) {
        CHECK_NOTHROW(mu->validate());
        for (int i = 0; i < mu->size(); ++i) {
          const Eigen::VectorXd x = mu->point(i);
          CHECK(seen.insert(std::vector<double>(x.data(), x.data() + x.size())).second);
          for (int d = 0; d < g.n; ++d) {
            CHECK(x[d] >= 0.0);
            CHECK(x[d] < 1.0);
            CHECK(std::ldexp(x[d], -g.k_min) == std::floor(std::ldexp(x[d], -g.k_min)));
          }
          CHECK(mu->weights[i] >= 1e-2);
          CHECK(mu->weights[i] <= 1e2);
        }
      }
      CHECK(no_common_point_masses(s, w));
    }
  }
  // a tiny cluster fills up and spills over instead of looping
  const GridSpec g = GridSpec::standard(1);
  Rng rng = Rng::stream(9, {1});
  auto [s, w] = generate_clustered(g, 200, 200, rng, 1);
  CHECK(s.size() + w.size() == 400);
  Rng bad(1);
  CHECK_THROWS(generate(g, -1, 0, bad));
}

TEST_CASE("golden pairs depend only on the config") {
  const RunConfig c = small_config();
  const KernelCase k = c.kernels.front();
  const auto [s1, w1] = golden_pair(c, k, 3);
  const auto [s2, w2] = golden_pair(c, k, 3);
  CHECK(to_json(s1) == to_json(s2));
  CHECK(to_json(w1) == to_json(w2));
  CHECK(to_json(golden_pair(c, k, 4).first) != to_json(s1));
}

TEST_CASE("admissible pair sampler") {
  int pairs = 0;
  for (int t = 0; t < 40; ++t) {
    const GridSpec g = GridSpec::standard(1 + t % 2);
    auto [s, w] = oracle::instance(g, 409, t, 14, 20, true);
    Rng rng = Rng::stream(409, {static_cast<std::uint64_t>(t)});
    const PairCollection p = random_admissible_pairs(g, s, w, rng);
    CHECK(check_admissible(g, p).ok());
    for (const auto& [I, J] : p.pairs) CHECK_FALSE(oracle::atoms(g, J, w).empty());
    pairs += static_cast<int>(p.size());
  }
  CHECK(pairs > 50);
}

TEST_CASE("peculiar terms") {
  const GridSpec g = GridSpec::standard(1);
  AtomicMeasure w(1);
  const double a = 0.125, b = 0.375, wa = 2.0, wb = 0.5;
  w.add(pt(a), wa);
  w.add(pt(b), wb);
  const Cube j{-1, {0}};
  const double ha = -std::sqrt(wb / (wa * (wa + wb))), hb = std::sqrt(wa / (wb * (wa + wb)));
  for (double y : {0.6, 0.9, -0.4, 3.0}) {
    const PeculiarTrial p = peculiar_terms(g, w, j, y);
    const double c = 0.25, d = y - c;
    const double ky = wa * ha / (a - y) + wb * hb / (b - y);
    const double xh = wa * ha * (a - c) + wb * hb * (b - c);
    CHECK(p.eta == doctest::Approx(std::abs(d) / 0.25));
    CHECK(p.lhs == doctest::Approx(std::abs(ky + xh / (d * d))).epsilon(1e-12));
    CHECK(p.rhs == doctest::Approx(xh / ((p.eta - 1) * d * d)).epsilon(1e-12));
    CHECK(p.lhs <= p.rhs);
  }
  CHECK_THROWS(peculiar_terms(g, w, j, 0.3));
  AtomicMeasure one(1);
  one.add(pt(0.125), 1.0);
  CHECK(peculiar_terms(g, one, j, 0.9).degenerate);
  CHECK_THROWS(peculiar_terms(GridSpec::standard(2), one, j, 0.9));
}

TEST_CASE("calibration gaps count as violations") {
  RunConfig c = small_config();
  c.suites = {"monotonicity"};
  c.kernels = {KernelCase{}};
  const Report plain = run_suites(c, nullptr);
  REQUIRE(plain.suites.size() == 1);
  CHECK(plain.suites[0].calibrated);
  CHECK_FALSE(plain.suites[0].frozen);
  CHECK(plain.suites[0].violations == 0);

  Calibration empty;
  const Report missing = run_suites(c, &empty);
  CHECK(missing.suites[0].violations > 0);
  CHECK_FALSE(missing.ok());

  Calibration zero;
  zero.constants["monotonicity"]["hilbert"] = 0.0;
  CHECK(run_suites(c, &zero).suites[0].violations > 0);

  Calibration generous;
  generous.constants["monotonicity"]["hilbert"] = 1e300;
  const Report fine = run_suites(c, &generous);
  CHECK(fine.suites[0].violations == 0);
  CHECK(*fine.suites[0].limit == c.slack * 1e300);

  // the exact maximum passes at any slack of at least one, and a shade less fails
  Calibration tight;
  tight.constants["monotonicity"]["hilbert"] = plain.suites[0].max_ratio;
  CHECK(run_suites(c, &tight).suites[0].violations == 0);
  if (plain.suites[0].max_ratio > 0) {
    tight.constants["monotonicity"]["hilbert"] = plain.suites[0].max_ratio / (c.slack * 1.01);
    CHECK(run_suites(c, &tight).suites[0].violations > 0);
  }
}

TEST_CASE("suite selection") {
  RunConfig c = small_config();
  c.suites = {"peculiar"};
  const Report r = run_suites(c, nullptr);
  REQUIRE(r.suites.size() == 1);
  CHECK(r.suites[0].name == "peculiar");
  CHECK(r.suites[0].violations == 0);
  json j = c.to_json();
  j["suites"] = {"nope"};
  CHECK_THROWS(RunConfig::from_json(j));
}

TEST_CASE("reports are deterministic") {
  const RunConfig c = small_config();
  const Report a = run_suites(c, nullptr), b = run_suites(c, nullptr);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.csv() == b.csv());
  CHECK(a.suites.size() >= all_suites().size());
  const std::string head = a.csv().substr(0, a.csv().find('\n'));
  CHECK(head == "suite,kernel,n,alpha,instances,max_ratio,frozen,limit,violations");
}

TEST_CASE("json round trips") {
  const GridSpec g = GridSpec::standard(2);
  CHECK(to_json(grid_from_json(to_json(g))) == to_json(g));
  const Cube q{-3, {2, 5}};
  CHECK(cube_from_json(to_json(q)) == q);

  auto [s, w] = oracle::instance(g, 419, 0, 9, 9, true);
  const AtomicMeasure back = measure_from_json(to_json(s));
  CHECK(back.points == s.points);
  CHECK(back.weights == s.weights);

  Rng rng = Rng::stream(419, {1});
  const PairCollection p = random_admissible_pairs(g, s, w, rng);
  const PairCollection pb = pairs_from_json(to_json(p));
  CHECK(pb.root == p.root);
  CHECK(pb.pairs == p.pairs);

  RunConfig c = small_config();
  c.seed = 17;
  c.suites = {"theorem", "peculiar"};
  c.kernels = {KernelCase{"cauchy", 2, 1.0}};
  const RunConfig cb = RunConfig::from_json(c.to_json());
  CHECK(cb.to_json() == c.to_json());
  CHECK(cb.seed == 17);

  Calibration cal;
  cal.constants["theorem"]["cauchy"] = 1.25;
  cal.provenance = {{"seed", 17}};
  const Calibration calb = Calibration::from_json(cal.to_json());
  CHECK(calb.get("theorem", "cauchy") == 1.25);
  CHECK_FALSE(calb.get("theorem", "hilbert"));
  CHECK(calb.to_json() == cal.to_json());
}
