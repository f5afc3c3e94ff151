#include "twl/stopping_form.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace twl {

namespace {

std::vector<Cube> unique_sorted(std::vector<Cube> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// sigma atoms in a but not in k
std::vector<int> outside_atoms(const GridSpec& g, const AtomicMeasure& sigma, const Cube& a, const Cube& k) {
  std::vector<int> out;
  for (int i = 0; i < sigma.size(); ++i) {
    if (contains(g, a, sigma.point(i)) && !contains(g, k, sigma.point(i))) out.push_back(i);
  }
  return out;
}

double poisson_ratio_sq(const GridSpec& g, const AtomicMeasure& sigma, const Cube& a, const Cube& hole,
                        const Cube& q, double alpha) {
  const auto out = outside_atoms(g, sigma, a, hole);
  const double p = poisson(g, q, sigma, out, alpha) / side(q);
  return p * p;
}

}  // namespace

void PairCollection::normalize() {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
}

std::vector<Cube> PairCollection::first() const {
  std::vector<Cube> v;
  for (const auto& p : pairs) v.push_back(p.I);
  return unique_sorted(std::move(v));
}

std::vector<Cube> PairCollection::second() const {
  std::vector<Cube> v;
  for (const auto& p : pairs) v.push_back(p.J);
  return unique_sorted(std::move(v));
}

std::vector<Cube> PairCollection::all() const {
  std::vector<Cube> v;
  for (const auto& p : pairs) {
    v.push_back(p.I);
    v.push_back(p.J);
  }
  return unique_sorted(std::move(v));
}

Admissibility check_admissible(const GridSpec& g, const PairCollection& p) {
  Admissibility r;
  std::map<Cube, std::vector<int>> levels;
  for (const auto& [I, J] : p.pairs) {
    if (!contains(p.root, I) || !contains(I, J) || !good_embedded(g, J, I)) {
      r.embedded = false;
      r.violations.push_back("pair " + to_string(I) + " / " + to_string(J) + " is not embedded");
      continue;
    }
    levels[J].push_back(I.level);
  }
  for (auto& [J, lv] : levels) {
    std::sort(lv.begin(), lv.end());
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    if (lv.back() - lv.front() + 1 != static_cast<int>(lv.size())) {
      r.geodesic = false;
      r.violations.push_back("geodesic gap above " + to_string(J));
    }
  }
  return r;
}

double TentMeasure::mass(const Cube& k) const {
  double s = 0.0;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (contains(k, cubes[i])) s += weights[i];
  }
  return s;
}

HalfSpaceMeasure TentMeasure::atoms(const GridSpec& g) const {
  HalfSpaceMeasure h(g.n);
  for (std::size_t i = 0; i < cubes.size(); ++i) h.add(center(g, cubes[i]), side(cubes[i]), weights[i]);
  return h;
}

TentMeasure tent_measure(const GridSpec& g, const AtomicMeasure& omega, const PairCollection& p) {
  TentMeasure t;
  t.cubes = p.second();
  for (const auto& j : t.cubes) {
    const double x = x_hat(g, omega, j);
    t.weights.push_back(x * x);
  }
  return t;
}

double tent_mass_geometric(const GridSpec& g, const HalfSpaceMeasure& atoms, const Cube& k) {
  const Point c = center(g, k);
  const double l = side(k);
  double s = 0.0;
  for (int i = 0; i < atoms.size(); ++i) {
    const double t = atoms.heights[i];
    if (t > l) continue;
    if ((atoms.points.col(i) - c).lpNorm<Eigen::Infinity>() <= 0.5 * (l - t)) s += atoms.weights[i];
  }
  return s;
}

double size_term(const GridSpec& g, const AtomicMeasure& sigma, const TentMeasure& tent, const Cube& a, const Cube& k,
                 double alpha) {
  const double m = mass(g, sigma, k);
  if (m <= 0.0) return 0.0;
  return poisson_ratio_sq(g, sigma, a, k, k, alpha) * tent.mass(k) / m;
}

SizeResult size_functional(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                           const PairCollection& p, double alpha) {
  if (!check_admissible(g, p).ok()) throw std::invalid_argument("pair collection is not admissible");
  const TentMeasure tent = tent_measure(g, omega, p);
  SizeResult r;
  for (const auto& i : p.first()) {
    if (mass(g, sigma, i) <= 0.0) {
      ++r.skipped;
      continue;
    }
    const double v = size_term(g, sigma, tent, p.root, i, alpha);
    if (v > r.value || r.witness.index.empty()) {
      r.value = std::max(r.value, v);
      r.witness = i;
    }
  }
  return r;
}


SizeDecomposition size_lemma_decompose(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                       const PairCollection& p, double alpha, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  SizeDecomposition d;
  d.eps = eps;
  d.size = size_functional(g, sigma, omega, p, alpha).value;
  d.big.root = d.except.root = p.root;
  if (d.size <= 0.0) {
    d.small.push_back(p);
    return d;
  }
  const TentMeasure tent = tent_measure(g, omega, p);
  const std::vector<Cube> cubes = p.all();
  auto minimal = [](std::vector<Cube> cand) {
    std::vector<Cube> out;
    for (const auto& k : cand) {
      bool min = true;
      for (const auto& q : cand) {
        if (q != k && contains(k, q)) {
          min = false;
          break;
        }
      }
      if (min) out.push_back(k);
    }
    return out;
  };

  std::vector<Cube> cand;
  for (const auto& k : cubes) {
    if (mass(g, sigma, k) > 0.0 && size_term(g, sigma, tent, p.root, k, alpha) >= eps * d.size) cand.push_back(k);
  }
  d.generations.push_back(minimal(cand));
  const double rho = 1.0 + eps;
  while (!d.generations.back().empty()) {
    const auto& prev = d.generations.back();
    cand.clear();
    for (const auto& k : cubes) {
      std::vector<Cube> below;
      for (const auto& l : prev) {
        if (l != k && contains(k, l)) below.push_back(l);
      }
      if (below.empty()) continue;
      double inner = 0.0;
      for (std::size_t i = 0; i < tent.cubes.size(); ++i) {
        if (std::any_of(below.begin(), below.end(), [&](const Cube& l) { return contains(l, tent.cubes[i]); }))
          inner += tent.weights[i];
      }
      if (tent.mass(k) >= rho * inner) cand.push_back(k);
    }
    auto next = minimal(cand);
    if (next.empty()) break;
    d.generations.push_back(std::move(next));
  }

  std::map<Cube, int> gen;
  for (int n = 0; n < static_cast<int>(d.generations.size()); ++n) {
    for (const auto& l : d.generations[n]) gen.emplace(l, n);
  }
  // minimal stopping cube containing q
  auto owner = [&](const Cube& q) -> std::optional<Cube> {
    std::optional<Cube> best;
    for (const auto& [l, n] : gen) {
      if (contains(l, q) && (!best || contains(*best, l))) best = l;
    }
    return best;
  };

  std::map<Cube, PairCollection> small;
  for (const auto& pr : p.pairs) {
    const auto oi = owner(pr.I);
    if (!oi) {
      d.except.pairs.push_back(pr);
      continue;
    }
    const auto oj = owner(pr.J);
    const int t = gen.at(*oi) - gen.at(*oj);
    if (t == 0 && pr.I != *oi) {
      auto& s = small[*oi];
      s.root = p.root;
      s.pairs.push_back(pr);
    } else {
      d.big.pairs.push_back(pr);
    }
  }
  for (auto& [l, s] : small) d.small.push_back(std::move(s));
  return d;
}

bool is_partition(const PairCollection& p, const SizeDecomposition& d) {
  std::vector<Pair> all = d.big.pairs;
  all.insert(all.end(), d.except.pairs.begin(), d.except.pairs.end());
  for (const auto& s : d.small) all.insert(all.end(), s.pairs.begin(), s.pairs.end());
  std::sort(all.begin(), all.end());
  std::vector<Pair> ref = p.pairs;
  std::sort(ref.begin(), ref.end());
  return all == ref;
}

Straddle straddles(const GridSpec& g, const PairCollection& p, const std::vector<Cube>& s) {
  (void)g;
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = a + 1; b < s.size(); ++b) {
      if (!disjoint(s[a], s[b])) throw std::invalid_argument("straddling family must be pairwise disjoint");
    }
  }
  Straddle r;
  for (const auto& [I, J] : p.pairs) {
    bool between = false;
    for (const auto& q : s) {
      if (contains(q, J) && contains(I, q)) between = true;
      if (contains(q, J) && !good_embedded(g, J, q)) r.case_in = false;
      if (contains(I, q) && !good_embedded(g, q, I)) r.case_out = false;
    }
    if (!between) r.holds = false;
  }
  return r;
}

double eta_squared(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, const PairCollection& p,
                   const std::vector<Cube>& s, double alpha, EtaSide side_kind) {
  const TentMeasure tent = tent_measure(g, omega, p);
  double best = 0.0;
  for (const auto& q : s) {
    const double m = mass(g, sigma, q);
    if (m <= 0.0) continue;
    double v = 0.0;
    if (side_kind == EtaSide::out) {
      v = size_term(g, sigma, tent, p.root, q, alpha);
    } else {
      const auto out = outside_atoms(g, sigma, p.root, q);
      for (std::size_t i = 0; i < tent.cubes.size(); ++i) {
        const Cube& j = tent.cubes[i];
        if (!contains(q, j)) continue;
        const double r = poisson(g, j, sigma, out, alpha) / side(j);
        v += r * r * tent.weights[i];
      }
      v /= m;
    }
    best = std::max(best, v);
  }
  return best;
}

Eigen::VectorXd stopping_form(const GridSpec& grid, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                              const PairCollection& p, const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                              const KernelSpec& k) {
  if (!no_common_point_masses(sigma, omega)) throw KernelError("measures share a point mass");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(k.components());
  std::map<Cube, Eigen::VectorXd> dg;
  for (const auto& [I, J] : p.pairs) {
    const auto in_i = atoms_in(grid, sigma, I);
    const double mi = mass(sigma, in_i);
    if (mi <= 0.0) continue;
    const auto in_p = atoms_in(grid, sigma, parent(I));
    double ei = 0.0, ep = 0.0;
    for (int a : in_i) ei += sigma.weights[a] * f[a];
    for (int a : in_p) ep += sigma.weights[a] * f[a];
    const double coef = ei / mi - ep / mass(sigma, in_p);
    if (coef == 0.0) continue;

    auto it = dg.find(J);
    if (it == dg.end()) it = dg.emplace(J, martingale_difference(grid, omega, g, J)).first;
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(sigma.size());
    for (int a : outside_atoms(grid, sigma, p.root, I)) ind[a] = 1.0;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(out.size());
    for (int j = 0; j < omega.size(); ++j) {
      const double w = omega.weights[j] * it->second[j];
      if (w != 0.0) s += w * apply(k, sigma, ind, omega.point(j));
    }
    out += coef * s;
  }
  return out;
}

StoppingFormMatrix stopping_form_matrix(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                        const PairCollection& p, const KernelSpec& k) {
  if (!no_common_point_masses(sigma, omega)) throw KernelError("measures share a point mass");
  StoppingFormMatrix r;
  r.components = k.components();
  std::map<Cube, std::vector<HaarFunction>> hs, hw;
  std::map<HaarKey, int> row, col;
  for (const auto& [I, J] : p.pairs) {
    const Cube pi = parent(I);
    if (!hs.count(pi)) {
      hs[pi] = haar_system(g, sigma, pi);
      for (const auto& h : hs[pi]) col.emplace(HaarKey{pi, h.label}, 0);
    }
    if (!hw.count(J)) {
      hw[J] = haar_system(g, omega, J);
      for (const auto& h : hw[J]) row.emplace(HaarKey{J, h.label}, 0);
    }
  }
  int c = 0;
  for (auto& [key, idx] : col) {
    idx = c++;
    r.cols.push_back(key);
  }
  int q = 0;
  for (auto& [key, idx] : row) {
    idx = q++;
    r.rows.push_back(key);
  }
  const int nrow = q;
  r.m = Eigen::MatrixXd::Zero(nrow * r.components, c);

  std::map<Cube, std::vector<Eigen::VectorXd>> hvals;
  for (const auto& [J, fs] : hw) {
    for (const auto& h : fs) hvals[J].push_back(evaluate(g, h, omega));
  }
  for (const auto& [I, J] : p.pairs) {
    if (mass(g, sigma, I) <= 0.0) continue;
    const Cube pi = parent(I);
    const unsigned slot = child_slot(pi, I);
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(sigma.size());
    for (int a : outside_atoms(g, sigma, p.root, I)) ind[a] = 1.0;
    Eigen::MatrixXd t(r.components, omega.size());
    for (int j = 0; j < omega.size(); ++j) t.col(j) = apply(k, sigma, ind, omega.point(j));
    const auto& fj = hw.at(J);
    for (std::size_t a = 0; a < fj.size(); ++a) {
      const Eigen::VectorXd pairing = t * omega.weights.cwiseProduct(hvals.at(J)[a]);
      const int ri = row.at(HaarKey{J, fj[a].label});
      for (const auto& hb : hs.at(pi)) {
        const double v = hb.values[slot];
        if (v == 0.0) continue;
        const int ci = col.at(HaarKey{pi, hb.label});
        for (int comp = 0; comp < r.components; ++comp) r.m(comp * nrow + ri, ci) += v * pairing[comp];
      }
    }
  }
  return r;
}

NormResult stopping_form_norm(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                              const PairCollection& p, const KernelSpec& k) {
  const auto m = stopping_form_matrix(g, sigma, omega, p, k);
  if (m.m.size() == 0) return {};
  return largest_singular_value(m.m);
}

}  // namespace twl
