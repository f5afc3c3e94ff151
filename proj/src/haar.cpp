#include "twl/haar.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace twl {

namespace {

struct ChildData {
  Eigen::VectorXd mass;
  Eigen::MatrixXd mean;  // n x 2^n, column j = E_{Q_j} x
  std::vector<unsigned> slot;  // per listed atom
};

ChildData child_data(const GridSpec& g, const AtomicMeasure& mu, const Cube& q, std::span<const int> atoms) {
  const unsigned nchild = 1u << g.n;
  ChildData d;
  d.mass = Eigen::VectorXd::Zero(nchild);
  d.mean = Eigen::MatrixXd::Zero(g.n, nchild);
  d.slot.reserve(atoms.size());
  for (int i : atoms) {
    const unsigned j = child_slot(q, cube_containing(g, mu.point(i), q.level - 1));
    d.slot.push_back(j);
    d.mass[j] += mu.weights[i];
    d.mean.col(j) += mu.weights[i] * mu.point(i);
  }
  for (unsigned j = 0; j < nchild; ++j) {
    if (d.mass[j] > 0) d.mean.col(j) /= d.mass[j];
  }
  return d;
}

std::vector<int> all_atoms_in(const GridSpec& g, const AtomicMeasure& mu, const Cube& q) { return atoms_in(g, mu, q); }

}  // namespace

std::vector<HaarLabel> haar_labels(int n) {
  std::vector<HaarLabel> out;
  const HaarLabel ones = (1u << n) - 1;
  for (HaarLabel a = 0; a < ones; ++a) out.push_back(a);
  return out;
}

HaarLabel coordinate_label(int n, int l) { return ((1u << n) - 1) & ~(1u << l); }

double haar_sign(HaarLabel a, unsigned beta, int n) {
  double s = 1.0;
  for (int k = 0; k < n; ++k) {
    if (((a >> k) & 1u) == 0) s *= ((beta >> k) & 1u) ? 1.0 : -1.0;
  }
  return s;
}

Eigen::VectorXd explicit_haar(const Eigen::VectorXd& child_masses, HaarLabel a, int n) {
  const double gamma = std::sqrt(child_masses.cwiseInverse().sum());
  Eigen::VectorXd v(child_masses.size());
  for (Eigen::Index b = 0; b < v.size(); ++b) v[b] = haar_sign(a, static_cast<unsigned>(b), n) / (gamma * child_masses[b]);
  return v;
}

std::vector<HaarFunction> haar_basis(const Cube& q, const Eigen::VectorXd& m) {
  const int n = q.dim();
  const auto labels = haar_labels(n);
  std::vector<int> charged;
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    if (m[j] > 0) charged.push_back(static_cast<int>(j));
  }
  std::vector<HaarFunction> out;
  if (charged.size() < 2) return out;

  if (static_cast<Eigen::Index>(charged.size()) == m.size()) {
    Eigen::MatrixXd p(m.size(), labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) p.col(k) = explicit_haar(m, labels[k], n);
    if (n > 1) {
      // symmetric orthonormalization; identity when the child masses agree
      const Eigen::MatrixXd gram = p.transpose() * m.asDiagonal() * p;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
      const Eigen::MatrixXd inv_sqrt =
          es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
      p = p * inv_sqrt;
    }
    for (std::size_t k = 0; k < labels.size(); ++k) out.push_back({q, labels[k], p.col(k)});
    return out;
  }

  // Helmert construction over the charged children in slot order
  double prefix = m[charged[0]];
  for (std::size_t k = 1; k < charged.size(); ++k) {
    const double mk = m[charged[k]];
    const double norm = std::sqrt(1.0 / prefix + 1.0 / mk);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m.size());
    for (std::size_t i = 0; i < k; ++i) v[charged[i]] = -1.0 / (prefix * norm);
    v[charged[k]] = 1.0 / (mk * norm);
    out.push_back({q, labels[k - 1], v});
    prefix += mk;
  }
  return out;
}

Eigen::VectorXd child_masses(const GridSpec& g, const AtomicMeasure& mu, const Cube& q, std::span<const int> atoms) {
  return child_data(g, mu, q, atoms).mass;
}

Eigen::VectorXd child_masses(const GridSpec& g, const AtomicMeasure& mu, const Cube& q) {
  const auto atoms = all_atoms_in(g, mu, q);
  return child_masses(g, mu, q, atoms);
}

std::vector<HaarFunction> haar_system(const GridSpec& g, const AtomicMeasure& mu, const Cube& q) {
  return haar_basis(q, child_masses(g, mu, q));
}

Eigen::VectorXd evaluate(const GridSpec& g, const HaarFunction& h, const AtomicMeasure& mu) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(mu.size());
  for (int i = 0; i < mu.size(); ++i) {
    if (contains(g, h.cube, mu.point(i))) v[i] = h.values[child_slot(h.cube, cube_containing(g, mu.point(i), h.cube.level - 1))];
  }
  return v;
}

double inner(const GridSpec& g, const HaarFunction& h, const AtomicMeasure& mu, const Eigen::VectorXd& f) {
  return (evaluate(g, h, mu).array() * f.array() * mu.weights.array()).sum();
}

Eigen::VectorXd martingale_difference(const GridSpec& g, const AtomicMeasure& mu, const Eigen::VectorXd& f,
                                      const Cube& q) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mu.size());
  const auto atoms = all_atoms_in(g, mu, q);
  if (atoms.empty()) return out;
  const unsigned nchild = 1u << g.n;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(nchild), s = Eigen::VectorXd::Zero(nchild);
  std::vector<unsigned> slot;
  double total = 0.0, total_f = 0.0;
  for (int i : atoms) {
    const unsigned j = child_slot(q, cube_containing(g, mu.point(i), q.level - 1));
    slot.push_back(j);
    m[j] += mu.weights[i];
    s[j] += mu.weights[i] * f[i];
    total += mu.weights[i];
    total_f += mu.weights[i] * f[i];
  }
  const double avg = total_f / total;
  for (std::size_t k = 0; k < atoms.size(); ++k) out[atoms[k]] = s[slot[k]] / m[slot[k]] - avg;
  return out;
}

HaarExpansion analyze(const GridSpec& g, const AtomicMeasure& mu, const Eigen::VectorXd& f, int depth) {
  if (f.size() != mu.size()) throw std::invalid_argument("function length differs from atom count");
  HaarExpansion e;
  if (mu.empty()) return e;
  const AtomicMeasure none(g.n);
  const CubeTree tree(g, mu, none, std::nullopt, depth);
  e.root = tree.root().cube;
  e.root_mass = tree.root().sigma_mass;
  e.lossy = !tree.separating();
  double s = 0.0;
  for (int i : tree.root().sigma_atoms) s += mu.weights[i] * f[i];
  e.mean = s / e.root_mass;
  for (const auto& nd : tree.nodes()) {
    if (nd.leaf()) continue;
    const auto basis = haar_basis(nd.cube, child_masses(g, mu, nd.cube, nd.sigma_atoms));
    const auto d = child_data(g, mu, nd.cube, nd.sigma_atoms);
    for (const auto& h : basis) {
      double c = 0.0;
      for (std::size_t k = 0; k < nd.sigma_atoms.size(); ++k) {
        const int i = nd.sigma_atoms[k];
        c += h.values[d.slot[k]] * f[i] * mu.weights[i];
      }
      if (c != 0.0) e.coefficients.emplace(HaarKey{nd.cube, h.label}, c);
    }
  }
  return e;
}

Eigen::VectorXd synthesize(const GridSpec& g, const AtomicMeasure& mu, const HaarExpansion& e) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mu.size());
  if (mu.empty()) return f;
  for (int i = 0; i < mu.size(); ++i) {
    if (contains(g, e.root, mu.point(i))) f[i] = e.mean;
  }
  const Cube* last = nullptr;
  std::vector<HaarFunction> basis;
  std::vector<int> atoms;
  ChildData d;
  for (const auto& [key, c] : e.coefficients) {
    if (!last || *last != key.cube) {
      atoms = all_atoms_in(g, mu, key.cube);
      d = child_data(g, mu, key.cube, atoms);
      basis = haar_basis(key.cube, d.mass);
      last = &key.cube;
    }
    for (const auto& h : basis) {
      if (h.label != key.label) continue;
      for (std::size_t k = 0; k < atoms.size(); ++k) f[atoms[k]] += c * h.values[d.slot[k]];
    }
  }
  return f;
}

Eigen::VectorXd corona_projection(const GridSpec& g, const AtomicMeasure& mu, const Eigen::VectorXd& f,
                                  std::span<const Cube> cubes) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mu.size());
  for (const auto& q : cubes) out += martingale_difference(g, mu, f, q);
  return out;
}

double variance(const AtomicMeasure& omega, std::span<const int> atoms) {
  if (atoms.size() < 2) return 0.0;  // a lone atom would leave rounding noise
  double m = 0.0;
  Point mean = Point::Zero(omega.n);
  for (int i : atoms) {
    m += omega.weights[i];
    mean += omega.weights[i] * omega.point(i);
  }
  mean /= m;
  double v = 0.0;
  for (int i : atoms) v += omega.weights[i] * (omega.point(i) - mean).squaredNorm();
  return v;
}

double energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms) {
  (void)g;
  const double m = mass(omega, atoms);
  if (!(m > 0)) return 0.0;
  const double l = side(j);
  return variance(omega, atoms) / (m * l * l);
}

double energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j) {
  const auto atoms = all_atoms_in(g, omega, j);
  return energy(g, omega, j, atoms);
}

double pair_energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j) {
  const auto atoms = all_atoms_in(g, omega, j);
  const double m = mass(omega, atoms);
  if (!(m > 0)) return 0.0;
  const double l = side(j);
  double s = 0.0;
  for (int a : atoms) {
    for (int b : atoms) s += omega.weights[a] * omega.weights[b] * (omega.point(a) - omega.point(b)).squaredNorm();
  }
  return s / (m * m * l * l);
}

double haar_x_energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms) {
  if (atoms.empty()) return 0.0;
  const auto d = child_data(g, omega, j, atoms);
  const auto basis = haar_basis(j, d.mass);
  double s = 0.0;
  for (const auto& h : basis) {
    // <x^l, h> = sum_beta h_beta m_beta E_beta x^l
    const Eigen::VectorXd weighted = h.values.cwiseProduct(d.mass);
    s += (d.mean * weighted).squaredNorm();
  }
  return s;
}

double haar_x_energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j) {
  const auto atoms = all_atoms_in(g, omega, j);
  return haar_x_energy(g, omega, j, atoms);
}

double projection_norm(const GridSpec& g, const AtomicMeasure& omega, std::span<const Cube> cubes) {
  double s = 0.0;
  for (const auto& j : cubes) s += haar_x_energy(g, omega, j);
  return s;
}

Eigen::VectorXd x_hat_terms(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms) {
  Eigen::VectorXd terms = Eigen::VectorXd::Zero(g.n);
  if (atoms.size() < 2) return terms;
  const auto d = child_data(g, omega, j, atoms);
  const Point c = center(g, j);
  int charged = 0;
  for (Eigen::Index b = 0; b < d.mass.size(); ++b) charged += d.mass[b] > 0;
  if (charged < 2) return terms;
  if (charged == d.mass.size()) {
    for (int l = 0; l < g.n; ++l) {
      const Eigen::VectorXd h = explicit_haar(d.mass, coordinate_label(g.n, l), g.n);
      double s = 0.0;
      for (Eigen::Index b = 0; b < d.mass.size(); ++b) s += h[b] * d.mass[b] * (d.mean(l, b) - c[l]);
      terms[l] = s;
    }
    return terms;
  }
  // ||Delta_J x^l||
  const double m = d.mass.sum();
  const Eigen::VectorXd avg = d.mean * d.mass / m;
  for (int l = 0; l < g.n; ++l) {
    double s = 0.0;
    for (Eigen::Index b = 0; b < d.mass.size(); ++b) {
      if (d.mass[b] > 0) s += d.mass[b] * (d.mean(l, b) - avg[l]) * (d.mean(l, b) - avg[l]);
    }
    terms[l] = std::sqrt(s);
  }
  return terms;
}

double x_hat(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms) {
  return x_hat_terms(g, omega, j, atoms).sum();
}

double x_hat(const GridSpec& g, const AtomicMeasure& omega, const Cube& j) {
  const auto atoms = all_atoms_in(g, omega, j);
  return x_hat(g, omega, j, atoms);
}

}  // namespace twl
