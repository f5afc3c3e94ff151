#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

using namespace twl;

namespace {

Eigen::VectorXd pt(double x) { return Eigen::VectorXd::Constant(1, x); }

double avg_abs(const GridSpec& g, const AtomicMeasure& s, const Eigen::VectorXd& f, const Cube& q) {
  double m = 0, v = 0;
  for (int i : oracle::atoms(g, q, s)) {
    m += s.weights[i];
    v += s.weights[i] * std::abs(f[i]);
  }
  return m > 0 ? v / m : 0.0;
}

double l2(const AtomicMeasure& mu, const Eigen::VectorXd& f) { return (mu.weights.array() * f.array().square()).sum(); }

// smallest member of s containing q, by scanning every member
int owner_brute(const StoppingData& s, const Cube& q) {
  int best = -1;
  for (int i = 0; i < s.size(); ++i) {
    if (oracle::sub(s.cubes[i], q) && (best < 0 || s.cubes[i].level < s.cubes[best].level)) best = i;
  }
  return best;
}

// charged sigma cubes strictly between q and its parent stopping cube, plus checks of the stopping rule
void check_cz_rule(const GridSpec& g, const AtomicMeasure& s, const Eigen::VectorXd& f, const CzStopping& cz) {
  const StoppingData& d = cz.data;
  const CubeTree tree(g, s, AtomicMeasure(g.n), d.root());
  for (const auto& nd : tree.nodes()) {
    if (nd.cube == d.root()) continue;
    const int own = owner_brute(d, nd.cube);
    REQUIRE(own >= 0);
    const double lim = cz.ratio * avg_abs(g, s, f, d.cubes[own]);
    if (d.cubes[own] == nd.cube) {
      // a stopping cube: its average beats the parent's threshold, and no cube in between does
      const int par = d.parent[own];
      const double plim = cz.ratio * avg_abs(g, s, f, d.cubes[par]);
      CHECK(avg_abs(g, s, f, nd.cube) > plim);
      for (int q = nd.parent; tree.node(q).cube != d.cubes[par]; q = tree.node(q).parent) {
        CHECK(avg_abs(g, s, f, tree.node(q).cube) <= plim);
      }
    } else {
      CHECK(avg_abs(g, s, f, nd.cube) <= lim);
    }
  }
}

}  // namespace

TEST_CASE("CZ stopping examples") {
  const GridSpec g = GridSpec::standard(1);
  auto [s, unused] = oracle::instance(g, 201, 0, 12, 0);
  const CzStopping flat = cz_stopping_times(g, s, Eigen::VectorXd::Constant(s.size(), 2.0), 4.0);
  CHECK(flat.data.size() == 1);

  // f lives on one atom with a huge value: the deepest cube around it stops
  AtomicMeasure two(1);
  two.add(pt(0.125), 1.0);
  two.add(pt(0.875), 1.0);
  Eigen::VectorXd f(2);
  f << 100.0, 0.0;
  const CzStopping cz = cz_stopping_times(g, two, f, 1.5);
  REQUIRE(cz.data.size() == 2);
  CHECK(cz.data.cubes[1] == Cube{-1, {0}});
  CHECK(cz.data.alpha[0] == doctest::Approx(1.5 * 50.0));

  CHECK_THROWS(cz_stopping_times(g, two, f, 1.0));
  CHECK_THROWS(cz_stopping_times(g, two, f, 4.0, Cube{-3, {3}}));
}

TEST_CASE("CZ stopping data properties") {
  for (int t = 0; t < 40; ++t) {
    const int n = 1 + t % 2;
    const GridSpec g = GridSpec::standard(n);
    auto [s, unused] = oracle::instance(g, 203, t, 10 + t % 25, 0);
    Eigen::VectorXd f = oracle::random_vector(s.size(), 203, t);
    // a few spikes make stopping happen
    for (int i = 0; i < s.size(); i += 5) f[i] *= 40;
    const double C = 2.0 + t % 3;
    const CzStopping cz = cz_stopping_times(g, s, f, C);
    const StoppingCheck chk = check_stopping_data(g, s, f, cz.data);
    CHECK(chk.ok());
    CHECK(quasiorthogonality(g, s, f, cz.data) <= cz.quasi);
    check_cz_rule(g, s, f, cz);
    // generation m carries at most C^-m of the mass
    const auto gens = carleson_generations(g, s, cz.data);
    for (std::size_t m = 0; m < gens.size(); ++m) CHECK(gens[m] <= std::pow(C, -double(m)) * (1 + 1e-12));
    // Carleson sums brute force
    for (int i = 0; i < cz.data.size(); ++i) {
      double sum = 0;
      for (int j = 0; j < cz.data.size(); ++j) {
        if (oracle::sub(cz.data.cubes[i], cz.data.cubes[j])) sum += oracle::mass(g, cz.data.cubes[j], s);
      }
      CHECK(sum <= cz.carleson * oracle::mass(g, cz.data.cubes[i], s) * (1 + 1e-12));
    }
    // coronas partition the tree and Pythagoras holds
    const CubeTree tree(g, s, AtomicMeasure(n), cz.data.root());
    double pieces = 0;
    std::size_t cubes = 0;
    for (int k = 0; k < cz.data.size(); ++k) {
      const auto cor = corona_cubes(tree, cz.data, k);
      cubes += cor.size();
      for (const auto& q : cor) CHECK(owner_brute(cz.data, q) == k);
      pieces += l2(s, corona_projection(g, s, f, cor));
    }
    CHECK(cubes == static_cast<std::size_t>(tree.size()));
    const double mean = (s.weights.array() * f.array()).sum() / s.total();
    CHECK(pieces + mean * mean * s.total() == doctest::Approx(l2(s, f)).epsilon(1e-10));
    const Eigen::VectorXd back = corona_reconstruction(g, s, f, cz.data);
    CHECK((back - f).cwiseAbs().maxCoeff() <= 1e-12 * f.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("stopping data bookkeeping") {
  const StoppingData d = make_stopping_data({{Cube{-2, {1}}, 2.0}, {Cube{0, {0}}, 1.0}, {Cube{-1, {0}}, 1.5}}, 4.0);
  REQUIRE(d.size() == 3);
  CHECK(d.root() == Cube{0, {0}});
  CHECK(d.owner(Cube{-5, {9}}) == d.index(Cube{-2, {1}}));
  CHECK(d.owner(Cube{-5, {31}}) == 0);
  CHECK(d.owner(Cube{0, {1}}) == -1);
  CHECK(d.generation(d.index(Cube{-2, {1}})) == 2);
  CHECK(d.kids(0) == std::vector<int>{d.index(Cube{-1, {0}})});
}

TEST_CASE("iterated coronas") {
  const GridSpec g = GridSpec::standard(1);
  auto [s, unused] = oracle::instance(g, 207, 0, 20, 0);
  Eigen::VectorXd f = oracle::random_vector(s.size(), 207, 0);
  f[3] *= 50;
  const CzStopping cz = cz_stopping_times(g, s, f, 3.0);
  std::vector<StoppingData> trivial;
  for (int k = 0; k < cz.data.size(); ++k) trivial.push_back(make_stopping_data({{cz.data.cubes[k], 2 * cz.data.alpha[k]}}, 4.0));
  const StoppingData it = iterate_coronas(cz.data, trivial);
  REQUIRE(it.size() == cz.data.size());
  for (int k = 0; k < it.size(); ++k) {
    const int j = cz.data.index(it.cubes[k]);
    REQUIRE(j >= 0);
    CHECK(it.alpha[k] == 2 * cz.data.alpha[j]);
  }
  // an inner cube outside the corona is discarded
  if (cz.data.size() > 1) {
    const Cube stop = cz.data.cubes[1];
    const Cube below{stop.level - 1, {2 * stop.index[0]}};
    std::vector<StoppingData> inner = trivial;
    const int par = cz.data.parent[1];
    inner[par] = make_stopping_data({{cz.data.cubes[par], 0.0}, {below, 1e9}}, 4.0);
    const StoppingData it2 = iterate_coronas(cz.data, inner);
    CHECK(it2.index(below) == -1);
  }
  CHECK_THROWS(iterate_coronas(cz.data, {}));
}

TEST_CASE("energy corona examples") {
  const GridSpec g = GridSpec::standard(1);
  auto [s, unused] = oracle::instance(g, 211, 0, 10, 0);
  AtomicMeasure w(1);
  w.add(pt(0.5 + std::ldexp(1.0, -12)), 1.0);
  const Cube top = bounding_cube(g, s, w);
  const EnergyCorona one = energy_corona(g, s, w, 0.0, top, 0.0);
  CHECK(one.data.size() == 1);

  // threshold zero: every cube with a positive sum stops
  auto [s2, w2] = oracle::instance(g, 211, 1, 10, 12, true);
  const Cube top2 = bounding_cube(g, s2, w2);
  const EnergyCorona all = energy_corona(g, s2, w2, 0.0, top2, 0.0);
  const CubeTree tree(g, s2, w2, top2);
  for (int k = 1; k < tree.size(); ++k) {
    const int own = all.data.owner(tree.node(k).cube);
    const int par = all.data.owner(tree.node(tree.node(k).parent).cube);
    const int top_node = tree.find(all.data.cubes[par]);
    const bool positive = embedded_energy(tree, k, top_node, 0.0) > 0.0;
    if (positive) CHECK(all.data.cubes[own] == tree.node(k).cube);
  }
}

TEST_CASE("energy corona guarantees") {
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 2;
    const GridSpec g = GridSpec::standard(n);
    const double alpha = n == 2 && t % 4 == 1 ? 1.0 : 0.0;
    auto [s, w] = oracle::instance(g, 213, t, 14, 20, true);
    const double e = energy_constant(g, s, w, alpha, Direction::forward, -1, EnergyKind::plugged).value;
    const Cube top = bounding_cube(g, s, w);
    // an exact constant never stops: embedded sums stay below e^2 |K|_sigma
    {
      const double used = e;
      const EnergyCorona ec = energy_corona(g, s, w, alpha, top, used);
      CHECK(ec.data.size() == 1);
      CHECK(ec.stopping_energy[0] <= e * (1 + 1e-12));
      for (int i = 0; i < ec.data.size(); ++i) {
        const double m = oracle::mass(g, ec.data.cubes[i], s);
        double sum = 0;
        for (int j = 0; j < ec.data.size(); ++j) {
          if (oracle::sub(ec.data.cubes[i], ec.data.cubes[j])) sum += oracle::mass(g, ec.data.cubes[j], s);
        }
        CHECK(sum <= 2 * m * (1 + 1e-12));
        CHECK(ec.stopping_energy[i] <= std::sqrt(10.0) * used * (1 + 1e-12));
      }
      CHECK(ec.carleson_ratio <= 2.0);
    }
  }
}

TEST_CASE("bounded fluctuation") {
  const GridSpec g = GridSpec::standard(1);
  const Cube k{0, {0}};
  auto [s, unused] = oracle::instance(g, 217, 0, 16, 0);
  const FluctuationCheck zero = gbf_check(g, s, Eigen::VectorXd::Zero(s.size()), k, 2.0);
  CHECK(zero.ok());
  CHECK(zero.family.empty());

  // 3 on [0, 1/2), which carries a fifth of the mass: root average 3/5
  {
    AtomicMeasure two(1);
    two.add(pt(0.125), 1.0);
    two.add(pt(0.625), 4.0);
    const Eigen::VectorXd h = Eigen::Vector2d(3.0, 0.0);
    const FluctuationCheck one = gbf_check(g, two, h, k, 2.0);
    CHECK(one.ok());
    REQUIRE(one.family.size() == 1);
    CHECK(oracle::sub(Cube{-1, {0}}, one.family[0]));
    // with equal masses the root average is 3/2
    two.weights[1] = 1.0;
    CHECK_FALSE(gbf_check(g, two, h, k, 2.0).averages);
  }

  // averages between 1 and gamma above the family
  Eigen::VectorXd mid = Eigen::VectorXd::Constant(s.size(), 1.5);
  CHECK_FALSE(gbf_check(g, s, mid, k, 2.0).averages);

  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 2;
    const GridSpec gn = GridSpec::standard(n);
    auto [sn, un] = oracle::instance(gn, 219, t, 24, 0);
    Eigen::VectorXd f = oracle::random_vector(sn.size(), 219, t);
    for (int i = 0; i < sn.size(); i += 4) f[i] *= 200;
    const CzStopping cz = cz_stopping_times(gn, sn, f, 2.0);
    const CubeTree tree(gn, sn, AtomicMeasure(n), cz.data.root());
    for (int fi = 0; fi < cz.data.size(); ++fi) {
      for (double gamma : {1.5, 4.0}) {
        const FluctuationSplit sp = bounded_fluctuation_split(gn, sn, f, cz, fi, gamma);
        const Eigen::VectorXd pf = corona_projection(gn, sn, f, corona_cubes(tree, cz.data, fi));
        CHECK((sp.part1 + sp.part2 - pf).cwiseAbs().maxCoeff() <= 1e-12 * (1 + pf.cwiseAbs().maxCoeff()));
        CHECK(sp.part1.cwiseAbs().maxCoeff() <= sp.bound1 * (1 + 1e-12));
        if (sp.big.empty()) {
          CHECK(sp.part2.cwiseAbs().maxCoeff() == 0.0);
        } else {
          CHECK(gbf_check(gn, sn, sp.part2 / sp.scale2, cz.data.cubes[fi], gamma).ok());
        }
      }
    }
  }
}

TEST_CASE("parallel split") {
  const StoppingData root = make_stopping_data({{Cube{0, {0}}, 1.0}}, 4.0);
  const ParallelSplit same = parallel_split(root, root);
  CHECK(same.near.size() == 1);
  CHECK(same.disjoint.empty());
  CHECK(same.far.empty());
  const StoppingData other = make_stopping_data({{Cube{0, {1}}, 1.0}, {Cube{-1, {3}}, 1.0}}, 4.0);
  const ParallelSplit apart = parallel_split(root, other);
  CHECK(apart.disjoint.size() == 2);

  for (int t = 0; t < 40; ++t) {
    const int n = 1 + t % 2;
    const GridSpec g = GridSpec::standard(n);
    auto [s, unused] = oracle::instance(g, 223, t, 30, 0);
    Eigen::VectorXd f1 = oracle::random_vector(s.size(), 223, t), f2 = oracle::random_vector(s.size(), 224, t);
    for (int i = 0; i < s.size(); i += 3) f1[i] *= 100;
    for (int i = 1; i < s.size(); i += 4) f2[i] *= 100;
    const StoppingData F = cz_stopping_times(g, s, f1, 2.0).data, G = cz_stopping_times(g, s, f2, 2.0).data;
    const ParallelSplit p = parallel_split(F, G);
    CHECK(p.near.size() + p.disjoint.size() + p.far.size() == static_cast<std::size_t>(F.size() * G.size()));
    std::set<std::pair<int, int>> near, dis, far;
    for (int i = 0; i < F.size(); ++i) {
      for (int j = 0; j < G.size(); ++j) {
        const Cube &a = F.cubes[i], &b = G.cubes[j];
        if (!oracle::sub(a, b) && !oracle::sub(b, a)) {
          dis.insert({i, j});
        } else if ((oracle::sub(b, a) && owner_brute(G, a) == j) || (oracle::sub(a, b) && owner_brute(F, b) == i)) {
          near.insert({i, j});
        } else {
          far.insert({i, j});
        }
      }
    }
    CHECK(std::set<std::pair<int, int>>(p.near.begin(), p.near.end()) == near);
    CHECK(std::set<std::pair<int, int>>(p.disjoint.begin(), p.disjoint.end()) == dis);
    CHECK(std::set<std::pair<int, int>>(p.far.begin(), p.far.end()) == far);
  }
}

TEST_CASE("double corona") {
  const GridSpec g = GridSpec::standard(1);
  {
    auto [s, w] = oracle::instance(g, 227, 0, 10, 1);
    const DoubleCorona dc = double_corona(g, s, w, Eigen::VectorXd::Constant(s.size(), 1.0), 0.0, 4.0);
    CHECK(dc.result.size() == 1);
  }
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 2;
    const GridSpec gn = GridSpec::standard(n);
    auto [s, w] = oracle::instance(gn, 229, t, 16, 20, true);
    Eigen::VectorXd f = oracle::random_vector(s.size(), 229, t);
    for (int i = 0; i < s.size(); i += 5) f[i] *= 60;
    const DoubleCorona dc = double_corona(gn, s, w, f, 0.0, 4.0);
    const Eigen::VectorXd back = corona_reconstruction(gn, s, f, dc.result);
    CHECK((back - f).cwiseAbs().maxCoeff() <= 1e-12 * f.cwiseAbs().maxCoeff());
    const StoppingCheck chk = check_stopping_data(gn, s, f, dc.result);
    CHECK(chk.averages);
    CHECK(chk.monotone);
    CHECK(chk.carleson_ratio <= dc.C1);
    CHECK(chk.l2_ratio <= dc.C1 * dc.C1);
    // every CZ cube survives
    for (const auto& q : dc.cz.data.cubes) CHECK(dc.result.index(q) >= 0);
  }
}
