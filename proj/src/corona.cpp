#include "twl/corona.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace twl {

int StoppingData::index(const Cube& q) const {
  for (int i = 0; i < size(); ++i) {
    if (cubes[i] == q) return i;
  }
  return -1;
}

int StoppingData::owner(const Cube& q) const {
  for (int i = size() - 1; i >= 0; --i) {
    if (contains(cubes[i], q)) return i;
  }
  return -1;
}

std::vector<int> StoppingData::kids(int f) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (parent[i] == f) out.push_back(i);
  }
  return out;
}

int StoppingData::generation(int f) const {
  int gen = 0;
  for (int p = parent[f]; p >= 0; p = parent[p]) ++gen;
  return gen;
}

StoppingData make_stopping_data(std::vector<std::pair<Cube, double>> cubes, double C0) {
  if (cubes.empty()) throw std::invalid_argument("stopping data needs a root");
  std::sort(cubes.begin(), cubes.end(), [](const auto& a, const auto& b) {
    if (a.first.level != b.first.level) return a.first.level > b.first.level;
    return a.first.index < b.first.index;
  });
  StoppingData s;
  s.C0 = C0;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    int p = -1;
    for (int j = static_cast<int>(i) - 1; j >= 0; --j) {
      if (s.cubes[j] == cubes[i].first) throw std::invalid_argument("duplicate stopping cube");
      if (contains(s.cubes[j], cubes[i].first)) {
        p = j;
        break;
      }
    }
    if (i > 0 && p < 0) throw std::invalid_argument("stopping cubes lack a common root");
    s.cubes.push_back(cubes[i].first);
    s.alpha.push_back(cubes[i].second);
    s.parent.push_back(p);
  }
  return s;
}

double average(const AtomicMeasure& sigma, const Eigen::VectorXd& f, std::span<const int> atoms) {
  double s = 0.0, m = 0.0;
  for (int i : atoms) {
    s += sigma.weights[i] * f[i];
    m += sigma.weights[i];
  }
  return m > 0.0 ? s / m : 0.0;
}

double average_abs(const AtomicMeasure& sigma, const Eigen::VectorXd& f, std::span<const int> atoms) {
  double s = 0.0, m = 0.0;
  for (int i : atoms) {
    s += sigma.weights[i] * std::abs(f[i]);
    m += sigma.weights[i];
  }
  return m > 0.0 ? s / m : 0.0;
}

std::vector<Cube> corona_cubes(const CubeTree& tree, const StoppingData& s, int f) {
  std::vector<Cube> out;
  for (const auto& nd : tree.nodes()) {
    if (s.owner(nd.cube) == f) out.push_back(nd.cube);
  }
  return out;
}

CzStopping cz_stopping_times(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f, double C,
                             std::optional<Cube> root) {
  if (!(C > 1.0)) throw std::invalid_argument("stopping ratio must exceed 1");
  const AtomicMeasure none(g.n);
  const CubeTree tree(g, sigma, none, root);
  if (!(tree.root().sigma_mass > 0.0)) throw std::invalid_argument("stopping root carries no mass");
  CzStopping cz;
  cz.ratio = C;
  cz.carleson = C / (C - 1.0);
  const double c0 = std::max({4.0, cz.carleson, 2.0 * C * std::sqrt(cz.carleson)});
  cz.quasi = 4.0 * C * C * cz.carleson * cz.carleson;

  std::vector<std::pair<Cube, double>> stops;
  std::vector<int> queue{0};
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const auto& fn = tree.node(queue[q]);
    const double threshold = C * average_abs(sigma, f, fn.sigma_atoms);
    stops.emplace_back(fn.cube, threshold);
    std::vector<int> stack;
    for (int c : fn.children) {
      if (c >= 0) stack.push_back(c);
    }
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      const auto& nd = tree.node(k);
      if (average_abs(sigma, f, nd.sigma_atoms) > threshold) {
        queue.push_back(k);
        continue;
      }
      for (int c : nd.children) {
        if (c >= 0) stack.push_back(c);
      }
    }
  }
  cz.data = make_stopping_data(std::move(stops), c0);
  return cz;
}

StoppingCheck check_stopping_data(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                                  const StoppingData& s) {
  StoppingCheck chk;
  const AtomicMeasure none(g.n);
  const CubeTree tree(g, sigma, none, s.root());
  for (const auto& nd : tree.nodes()) {
    const int o = s.owner(nd.cube);
    if (o < 0) continue;
    const double a = average_abs(sigma, f, nd.sigma_atoms);
    if (a > s.alpha[o]) chk.averages = false;
    if (s.alpha[o] > 0.0) chk.average_ratio = std::max(chk.average_ratio, a / s.alpha[o]);
    else if (a > 0.0) chk.average_ratio = std::numeric_limits<double>::infinity();
  }
  std::vector<double> m(s.size());
  for (int i = 0; i < s.size(); ++i) m[i] = mass(g, sigma, s.cubes[i]);
  double l2 = 0.0;
  for (int i = 0; i < s.size(); ++i) {
    double sub = 0.0;
    for (int j = 0; j < s.size(); ++j) {
      if (contains(s.cubes[i], s.cubes[j])) sub += m[j];
    }
    if (m[i] > 0.0) chk.carleson_ratio = std::max(chk.carleson_ratio, sub / m[i]);
    if (sub > s.C0 * m[i]) chk.carleson = false;
    l2 += s.alpha[i] * s.alpha[i] * m[i];
    if (s.parent[i] >= 0 && s.alpha[s.parent[i]] > s.alpha[i]) chk.monotone = false;
  }
  const auto atoms = tree.root().sigma_atoms;
  double norm = 0.0;
  for (int i : atoms) norm += sigma.weights[i] * f[i] * f[i];
  if (l2 > s.C0 * s.C0 * norm) chk.l2 = false;
  chk.l2_ratio = norm > 0.0 ? l2 / norm : (l2 > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return chk;
}

double quasiorthogonality(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                          const StoppingData& s) {
  double lhs = 0.0, norm = 0.0;
  for (int i = 0; i < sigma.size(); ++i) {
    double v = 0.0;
    for (int k = 0; k < s.size(); ++k) {
      if (contains(g, s.cubes[k], sigma.point(i))) v += s.alpha[k];
    }
    lhs += sigma.weights[i] * v * v;
    if (contains(g, s.root(), sigma.point(i))) norm += sigma.weights[i] * f[i] * f[i];
  }
  if (norm == 0.0) return lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return lhs / norm;
}

std::vector<double> carleson_generations(const GridSpec& g, const AtomicMeasure& sigma, const StoppingData& s) {
  std::vector<double> m(s.size());
  for (int i = 0; i < s.size(); ++i) m[i] = mass(g, sigma, s.cubes[i]);
  std::vector<double> out;
  for (int f = 0; f < s.size(); ++f) {
    if (!(m[f] > 0.0)) continue;
    std::vector<int> gen{f};
    for (std::size_t depth = 0; !gen.empty(); ++depth) {
      double sum = 0.0;
      for (int k : gen) sum += m[k];
      if (out.size() <= depth) out.push_back(0.0);
      out[depth] = std::max(out[depth], sum / m[f]);
      std::vector<int> next;
      for (int k : gen) {
        for (int c : s.kids(k)) next.push_back(c);
      }
      gen = std::move(next);
    }
  }
  return out;
}

StoppingData iterate_coronas(const StoppingData& outer, const std::vector<StoppingData>& inner) {
  if (inner.size() != outer.cubes.size()) throw std::invalid_argument("one inner tree per stopping cube");
  std::vector<std::pair<Cube, double>> out;
  double c = outer.C0;
  for (int f = 0; f < outer.size(); ++f) {
    const auto& in = inner[f];
    c = std::max(c, in.C0);
    double top = outer.alpha[f];
    for (int k = 0; k < in.size(); ++k) {
      if (in.cubes[k] == outer.cubes[f]) {
        top = std::max(top, in.alpha[k]);
        continue;
      }
      if (outer.owner(in.cubes[k]) == f && in.alpha[k] >= outer.alpha[f]) out.emplace_back(in.cubes[k], in.alpha[k]);
    }
    out.emplace_back(outer.cubes[f], top);
  }
  return make_stopping_data(std::move(out), 2.0 * c * c);
}

std::vector<int> maximal_embedded(const CubeTree& tree, int i) {
  const auto& g = tree.grid();
  const Cube& big = tree.node(i).cube;
  std::vector<int> out;
  std::vector<int> stack;
  for (int c : tree.node(i).children) {
    if (c >= 0) stack.push_back(c);
  }
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    const Cube& j = tree.node(k).cube;
    if (good_embedded(g, j, big)) {
      out.push_back(k);
      continue;
    }
    for (int c : tree.node(k).children) {
      if (c >= 0) stack.push_back(c);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double embedded_energy(const CubeTree& tree, int i, int top, double alpha) {
  const auto& g = tree.grid();
  const auto& tn = tree.node(top);
  double s = 0.0;
  for (int k : maximal_embedded(tree, i)) {
    const auto& nd = tree.node(k);
    const double v = variance(tree.omega(), nd.omega_atoms);
    if (v == 0.0) continue;
    const double p = poisson(g, nd.cube, tree.sigma(), tn.sigma_atoms, alpha);
    const double l = side(nd.cube);
    s += v / (l * l) * p * p;
  }
  return s;
}

EnergyCorona energy_corona(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                           const Cube& s0, double energy, double factor) {
  check_alpha(g.n, alpha);
  EnergyCorona ec;
  std::vector<std::pair<Cube, double>> stops{{s0, 0.0}};
  std::vector<double> xs{0.0};
  bool charged = false;
  for (int i = 0; i < sigma.size() && !charged; ++i) charged = contains(g, s0, sigma.point(i));
  for (int i = 0; i < omega.size() && !charged; ++i) charged = contains(g, s0, omega.point(i));
  if (!charged) {
    ec.data = make_stopping_data(stops, 2.0);
    ec.stopping_energy = xs;
    return ec;
  }
  const CubeTree tree(g, sigma, omega, s0);
  const double threshold = factor * energy * energy;
  std::vector<int> queue{0};
  std::vector<int> stop_nodes{0};
  for (std::size_t q = 0; q < queue.size(); ++q) {
    const int s = queue[q];
    double x2 = 0.0;
    auto visit_x = [&](int k, double sum) {
      const double m = tree.node(k).sigma_mass;
      if (m > 0.0) x2 = std::max(x2, sum / m);
    };
    if (maximal_embedded(tree, s).empty()) ++ec.empty_families;
    visit_x(s, embedded_energy(tree, s, s, alpha));
    std::vector<int> stack;
    for (int c : tree.node(s).children) {
      if (c >= 0) stack.push_back(c);
    }
    while (!stack.empty()) {
      const int k = stack.back();
      stack.pop_back();
      const auto fam = maximal_embedded(tree, k);
      if (fam.empty()) ++ec.empty_families;
      const double sum = embedded_energy(tree, k, s, alpha);
      if (sum > 0.0 && sum >= threshold * tree.node(k).sigma_mass) {
        queue.push_back(k);
        continue;
      }
      visit_x(k, sum);
      for (int c : tree.node(k).children) {
        if (c >= 0) stack.push_back(c);
      }
    }
    const auto pos = static_cast<std::size_t>(std::find(stop_nodes.begin(), stop_nodes.end(), s) - stop_nodes.begin());
    if (pos == stop_nodes.size()) {
      stop_nodes.push_back(s);
      stops.emplace_back(tree.node(s).cube, 0.0);
      xs.push_back(std::sqrt(x2));
    } else {
      xs[pos] = std::sqrt(x2);
    }
  }
  ec.data = make_stopping_data(stops, 2.0);
  ec.stopping_energy.assign(ec.data.size(), 0.0);
  for (std::size_t k = 0; k < stops.size(); ++k) ec.stopping_energy[ec.data.index(stops[k].first)] = xs[k];
  for (int k = 0; k < tree.size(); ++k) {
    const auto& nd = tree.node(k);
    if (!(nd.sigma_mass > 0.0)) continue;
    double sub = 0.0;
    for (int s : stop_nodes) {
      if (contains(nd.cube, tree.node(s).cube)) sub += tree.node(s).sigma_mass;
    }
    ec.carleson_ratio = std::max(ec.carleson_ratio, sub / nd.sigma_mass);
  }
  return ec;
}

FluctuationSplit bounded_fluctuation_split(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                                           const CzStopping& cz, int f_index, double gamma) {
  if (!(gamma > 1.0)) throw std::invalid_argument("gamma must exceed 1");
  const auto& s = cz.data;
  const AtomicMeasure none(g.n);
  const CubeTree tree(g, sigma, none, s.root());
  const auto cubes = corona_cubes(tree, s, f_index);
  const Eigen::VectorXd pf = corona_projection(g, sigma, f, cubes);
  const auto f_atoms = atoms_in(g, sigma, s.cubes[f_index]);
  const double ef_abs = average_abs(sigma, f, f_atoms);
  const double ef = average(sigma, f, f_atoms);
  const double C = cz.ratio;
  FluctuationSplit out;
  out.bound1 = (C * gamma + gamma + 1.0) * ef_abs;
  out.scale2 = (C + 1.0) * ef_abs;
  out.part2 = Eigen::VectorXd::Zero(sigma.size());
  for (int k : s.kids(f_index)) {
    const auto atoms = atoms_in(g, sigma, s.cubes[k]);
    const double d = average(sigma, f, atoms) - ef;
    if (std::abs(d) <= out.bound1) continue;
    out.big.push_back(s.cubes[k]);
    for (int i : atoms) out.part2[i] = d;
  }
  out.part1 = pf - out.part2;
  return out;
}

FluctuationCheck gbf_check(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& h, const Cube& k,
                           double gamma) {
  FluctuationCheck chk;
  std::vector<int> inside;
  double total = 0.0, scale = 0.0;
  for (int i = 0; i < sigma.size(); ++i) {
    if (contains(g, k, sigma.point(i))) {
      inside.push_back(i);
      total += sigma.weights[i] * h[i];
      scale += sigma.weights[i] * std::abs(h[i]);
    } else if (h[i] != 0.0) {
      chk.support = false;
    }
  }
  chk.mean_zero = std::abs(total) <= 1e-12 * scale;
  if (inside.empty()) return chk;
  const AtomicMeasure none(g.n);
  const CubeTree tree(g, sigma, none, k);
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int q = stack.back();
    stack.pop_back();
    const auto& nd = tree.node(q);
    const double a = average_abs(sigma, h, nd.sigma_atoms);
    if (a > gamma) {
      chk.family.push_back(nd.cube);
      const double v = h[nd.sigma_atoms.front()];
      for (int i : nd.sigma_atoms) {
        if (h[i] != v) chk.constant = false;
      }
      if (!(std::abs(v) > gamma)) chk.constant = false;
      continue;
    }
    if (a > 1.0) chk.averages = false;
    for (int c : nd.children) {
      if (c >= 0) stack.push_back(c);
    }
  }
  std::sort(chk.family.begin(), chk.family.end());
  return chk;
}

ParallelSplit parallel_split(const StoppingData& f, const StoppingData& g) {
  ParallelSplit out;
  for (int i = 0; i < f.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) {
      const Cube& a = f.cubes[i];
      const Cube& b = g.cubes[j];
      if (disjoint(a, b)) {
        out.disjoint.emplace_back(i, j);
      } else if ((contains(b, a) && g.owner(a) == j) || (contains(a, b) && f.owner(b) == i)) {
        out.near.emplace_back(i, j);
      } else {
        out.far.emplace_back(i, j);
      }
    }
  }
  return out;
}

DoubleCorona double_corona(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                           const Eigen::VectorXd& f, double alpha, double C) {
  DoubleCorona dc;
  dc.cz = cz_stopping_times(g, sigma, f, C);
  dc.energy_constant = energy_constant(g, sigma, omega, alpha, Direction::forward, -1, EnergyKind::plugged).value;
  std::vector<StoppingData> inner;
  for (int k = 0; k < dc.cz.data.size(); ++k) {
    auto ec = energy_corona(g, sigma, omega, alpha, dc.cz.data.cubes[k], dc.energy_constant);
    std::fill(ec.data.alpha.begin(), ec.data.alpha.end(), 2.0 * dc.cz.data.alpha[k]);
    ec.data.C0 = std::max(ec.data.C0, dc.cz.data.C0);
    inner.push_back(ec.data);
    dc.energy.push_back(std::move(ec));
  }
  dc.result = iterate_coronas(dc.cz.data, inner);
  dc.C1 = dc.result.C0;
  return dc;
}

Eigen::VectorXd corona_reconstruction(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                                      const StoppingData& s) {
  const AtomicMeasure none(g.n);
  const CubeTree tree(g, sigma, none, s.root());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sigma.size());
  for (int k = 0; k < s.size(); ++k) out += corona_projection(g, sigma, f, corona_cubes(tree, s, k));
  const auto& root_atoms = tree.root().sigma_atoms;
  const double m = average(sigma, f, root_atoms);
  for (int i : root_atoms) out[i] += m;
  return out;
}

}  // namespace twl
