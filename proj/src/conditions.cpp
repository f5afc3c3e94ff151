#include "twl/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace twl {

double a2_term(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha, A2Kind kind,
               Direction dir, const Cube& q) {
  check_alpha(g.n, alpha);
  const AtomicMeasure& a = dir == Direction::forward ? sigma : omega;
  const AtomicMeasure& b = dir == Direction::forward ? omega : sigma;
  const double scale = std::pow(side(q), g.n - alpha);  // |Q|^{1 - alpha/n}
  if (kind == A2Kind::tailless) return mass(g, a, q) * mass(g, b, q) / (scale * scale);
  const double mb = mass(g, b, q);
  if (mb == 0.0) return 0.0;
  return poisson(g, q, a, alpha, PoissonKind::conformal) * mb / scale;
}

CubeWitness a2_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                        A2Kind kind, Direction dir, const std::vector<Cube>& cubes) {
  if (cubes.empty()) throw std::invalid_argument("empty cube enumeration");
  CubeWitness w{0.0, cubes.front()};
  for (const auto& q : cubes) {
    const double t = a2_term(g, sigma, omega, alpha, kind, dir, q);
    if (t > w.value) w = {t, q};
  }
  return w;
}

CubeWitness a2_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                        A2Kind kind, Direction dir) {
  return a2_constant(g, sigma, omega, alpha, kind, dir, window_cubes(g, sigma, omega));
}

double a2_tailless_factor(int n, double alpha) { return std::pow(1.0 + 0.5 * std::sqrt(double(n)), 2.0 * (n - alpha)); }

std::vector<Cube> a2_order_violations(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                      double alpha, const std::vector<Cube>& cubes, double factor) {
  std::vector<Cube> out;
  for (const auto& q : cubes) {
    const double tl = a2_term(g, sigma, omega, alpha, A2Kind::tailless, Direction::forward, q);
    const double fw = a2_term(g, sigma, omega, alpha, A2Kind::two_tailed, Direction::forward, q);
    const double dl = a2_term(g, sigma, omega, alpha, A2Kind::two_tailed, Direction::dual, q);
    if (tl > factor * fw || tl > factor * dl) out.push_back(q);
  }
  return out;
}

double energy_piece(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                    EnergyKind kind, const Cube& top, const Cube& piece) {
  const auto w_atoms = atoms_in(g, omega, piece);
  const double v = variance(omega, w_atoms);
  if (v == 0.0) return 0.0;
  std::vector<int> s_atoms;
  for (int i : atoms_in(g, sigma, top)) {
    if (kind == EnergyKind::plugged || !contains(g, piece, sigma.point(i))) s_atoms.push_back(i);
  }
  const double p = poisson(g, piece, sigma, s_atoms, alpha) / side(piece);
  return p * p * v;
}

double evaluate_subpartition(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                             EnergyKind kind, const Cube& top, std::vector<Cube> pieces) {
  const double m = mass(g, sigma, top);
  if (!(m > 0.0)) return 0.0;
  std::sort(pieces.begin(), pieces.end());
  double s = 0.0;
  for (const auto& r : pieces) {
    const double t = energy_piece(g, sigma, omega, alpha, kind, top, r);
    if (t > 0.0) s += t;
  }
  return s / m;
}

namespace {

// P(R, 1_{a_j \ R} sigma) for every ancestor a_j of R (index = depth of a_j)
std::vector<double> hole_poisson(const CubeTree& tree, int r, double alpha) {
  const auto& g = tree.grid();
  const auto& s = tree.sigma();
  std::vector<int> chain;
  for (int k = r; k >= 0; k = tree.node(k).parent) chain.push_back(k);
  std::reverse(chain.begin(), chain.end());
  const auto& rn = tree.node(r);
  const Point c = center(g, rn.cube);
  const double l = side(rn.cube);
  std::vector<double> cum(chain.size(), 0.0);
  for (int j = static_cast<int>(chain.size()) - 2; j >= 0; --j) {
    const auto& aj = tree.node(chain[j]);
    const Cube& below = tree.node(chain[j + 1]).cube;
    double shell = 0.0;
    for (int i : aj.sigma_atoms) {
      if (!contains(g, below, s.point(i))) shell += s.weights[i] * poisson_kernel(c, l, s.point(i), g.n, alpha, PoissonKind::standard);
    }
    cum[j] = cum[j + 1] + shell;
  }
  return cum;
}

EnergyResult energy_forward(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                            int depth, EnergyKind kind) {
  EnergyResult best;
  if (sigma.empty() || omega.empty()) return best;
  const CubeTree tree(g, sigma, omega);
  best.top = tree.root().cube;
  const int nn = tree.size();
  std::vector<double> var(nn), self(nn);
  std::vector<std::vector<double>> cum(nn);
  for (int r = 0; r < nn; ++r) {
    const auto& nd = tree.node(r);
    var[r] = variance(omega, nd.omega_atoms);
    if (var[r] == 0.0) continue;
    cum[r] = hole_poisson(tree, r, alpha);
    self[r] = poisson(g, nd.cube, sigma, nd.sigma_atoms, alpha);
  }
  std::vector<double> value(nn);
  std::vector<char> take(nn);
  for (int q = 0; q < nn; ++q) {
    const auto& top = tree.node(q);
    if (!(top.sigma_mass > 0.0)) continue;
    const auto sub = tree.subtree(q, depth);
    for (auto it = sub.rbegin(); it != sub.rend(); ++it) {
      const int r = *it;
      const auto& nd = tree.node(r);
      double phi = 0.0;
      if (var[r] > 0.0) {
        double p = cum[r][top.depth];
        if (kind == EnergyKind::plugged) p += self[r];
        p /= side(nd.cube);
        phi = p * p * var[r];
      }
      double split = 0.0;
      const bool at_bottom = depth >= 0 && nd.depth - top.depth >= depth;
      if (!at_bottom) {
        for (int c : nd.children) {
          if (c >= 0) split += value[c];
        }
      }
      take[r] = at_bottom || phi >= split;
      value[r] = take[r] ? phi : split;
    }
    std::vector<Cube> pieces;
    std::vector<int> stack{q};
    while (!stack.empty()) {
      const int r = stack.back();
      stack.pop_back();
      if (take[r]) {
        pieces.push_back(tree.node(r).cube);
        continue;
      }
      for (int c : tree.node(r).children) {
        if (c >= 0) stack.push_back(c);
      }
    }
    const double v = evaluate_subpartition(g, sigma, omega, alpha, kind, top.cube, pieces);
    if (v > best.squared) {
      best.squared = v;
      best.top = top.cube;
      best.pieces = std::move(pieces);
    }
  }
  std::sort(best.pieces.begin(), best.pieces.end());
  std::erase_if(best.pieces, [&](const Cube& r) { return energy_piece(g, sigma, omega, alpha, kind, best.top, r) == 0.0; });
  best.value = std::sqrt(best.squared);
  return best;
}

}  // namespace

EnergyResult energy_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                             Direction dir, int depth, EnergyKind kind) {
  check_alpha(g.n, alpha);
  return dir == Direction::forward ? energy_forward(g, sigma, omega, alpha, depth, kind)
                                   : energy_forward(g, omega, sigma, alpha, depth, kind);
}

std::vector<Cube> maximal_cubes(std::vector<Cube> cubes) {
  std::sort(cubes.begin(), cubes.end());
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
  std::vector<Cube> out;
  for (const auto& c : cubes) {
    const bool covered = std::any_of(cubes.begin(), cubes.end(), [&](const Cube& d) { return d != c && contains(d, c); });
    if (!covered) out.push_back(c);
  }
  return out;
}

AdaptedReport f_adapted_check(const GridSpec& g, const AdaptedFamily& fam, double tol) {
  AdaptedReport rep;
  const std::size_t nf = fam.tops.size();
  if (fam.collections.size() != nf || fam.coefficients.size() != nf)
    throw std::invalid_argument("adapted family has mismatched lengths");
  std::map<Cube, std::size_t> owner;
  for (std::size_t f = 0; f < nf; ++f) {
    std::set<Cube> js(fam.collections[f].begin(), fam.collections[f].end());
    for (const auto& j : js) {
      if (!good_embedded(g, j, fam.tops[f])) {
        rep.embedded_ok = false;
        rep.violations.push_back(to_string(j) + " not deeply embedded in " + to_string(fam.tops[f]));
      }
      auto [it, fresh] = owner.emplace(j, f);
      if (!fresh) {
        rep.disjoint_ok = false;
        rep.violations.push_back(to_string(j) + " shared by two collections");
      }
    }
    double scale = 0.0;
    for (const auto& [key, c] : fam.coefficients[f]) scale = std::max(scale, std::abs(c));
    for (const auto& [key, c] : fam.coefficients[f]) {
      if (std::abs(c) <= tol * scale) continue;
      if (c < 0.0 || !js.count(key.cube)) {
        rep.coefficients_ok = false;
        rep.violations.push_back("coefficient at " + to_string(key.cube) + " violates sign or support");
      }
    }
  }
  // overlap constant: every I on a geodesic [J*, F]; pointwise overlap of
  // nested-or-disjoint cubes peaks inside the smallest one
  struct Straddle {
    Cube top, jstar;
  };
  std::vector<Straddle> pairs;
  std::set<Cube> geodesic;
  for (std::size_t f = 0; f < nf; ++f) {
    for (const auto& js : maximal_cubes(fam.collections[f])) {
      pairs.push_back({fam.tops[f], js});
      for (int k = js.level; k <= fam.tops[f].level; ++k) geodesic.insert(ancestor(js, k));
    }
  }
  for (const auto& i : geodesic) {
    std::vector<Cube> b;
    for (const auto& p : pairs) {
      if (contains(i, p.jstar) && contains(p.top, i)) b.push_back(p.jstar);
    }
    for (const auto& x : b) {
      const int cnt = static_cast<int>(std::count_if(b.begin(), b.end(), [&](const Cube& y) { return contains(y, x); }));
      rep.overlap = std::max(rep.overlap, cnt);
    }
  }
  return rep;
}

HalfSpaceMeasure functional_energy_mu(const GridSpec& g, const AtomicMeasure& omega, const AdaptedFamily& fam) {
  HalfSpaceMeasure mu(g.n);
  for (std::size_t f = 0; f < fam.tops.size(); ++f) {
    for (const auto& js : maximal_cubes(fam.collections[f])) {
      double s = 0.0;
      for (const auto& j : fam.collections[f]) {
        if (contains(js, j)) s += haar_x_energy(g, omega, j);
      }
      const double l = side(js);
      mu.add(center(g, js), l, s / (l * l));
    }
  }
  return mu;
}

PoissonTesting poisson_testing_check(const GridSpec& g, const HalfSpaceMeasure& mu, const AtomicMeasure& sigma,
                                     const Cube& i, double alpha, double a2_tailless, double a2, double energy) {
  PoissonTesting r;
  const auto s_atoms = atoms_in(g, sigma, i);
  const double si = mass(sigma, s_atoms);
  for (int k = 0; k < mu.size(); ++k) {
    const double p = halfspace_poisson(sigma, s_atoms, mu.points.col(k), mu.heights[k], alpha);
    r.lhs1 += p * p * mu.weights[k];
  }
  r.rhs1 = (a2_tailless + energy * energy) * si;
  for (int j = 0; j < sigma.size(); ++j) {
    const double p = dual_halfspace_poisson(mu, sigma.point(j), alpha, g, i);
    r.lhs2 += p * p * sigma.weights[j];
  }
  double box = 0.0;
  for (int k = 0; k < mu.size(); ++k) {
    if (in_box(g, i, mu.points.col(k), mu.heights[k])) box += mu.heights[k] * mu.heights[k] * mu.weights[k];
  }
  r.rhs2 = (a2 + energy * std::sqrt(a2)) * box;
  return r;
}

ConstantReport compute_constants(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                 const KernelSpec& k, int energy_depth) {
  ConstantReport rep;
  const auto cubes = window_cubes(g, sigma, omega);
  rep.enumerated = cubes.size();
  const double a = k.alpha;
  rep.w_A2 = a2_constant(g, sigma, omega, a, A2Kind::two_tailed, Direction::forward, cubes);
  rep.w_A2_star = a2_constant(g, sigma, omega, a, A2Kind::two_tailed, Direction::dual, cubes);
  rep.w_A2_tailless = a2_constant(g, sigma, omega, a, A2Kind::tailless, Direction::forward, cubes);
  rep.w_T = testing_constant(g, sigma, omega, k, Direction::forward, cubes);
  rep.w_T_star = testing_constant(g, sigma, omega, k, Direction::dual, cubes);
  rep.w_E = energy_constant(g, sigma, omega, a, Direction::forward, energy_depth);
  rep.w_E_star = energy_constant(g, sigma, omega, a, Direction::dual, energy_depth);
  rep.A2 = rep.w_A2.value;
  rep.A2_star = rep.w_A2_star.value;
  rep.A2_tailless = rep.w_A2_tailless.value;
  rep.T = rep.w_T.value;
  rep.T_star = rep.w_T_star.value;
  rep.E = rep.w_E.value;
  rep.E_star = rep.w_E_star.value;
  return rep;
}

}  // namespace twl
