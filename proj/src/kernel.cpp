#include "twl/kernel.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace twl {

KernelSpec KernelSpec::parse(const std::string& name, int n, double alpha) {
  if (name == "hilbert") return hilbert();
  if (name == "riesz_vector") return riesz_vector(n, alpha);
  if (name == "cauchy") return cauchy();
  if (name.rfind("riesz:", 0) == 0) return riesz(n, alpha, std::stoi(name.substr(6)));
  throw KernelError("unknown kernel '" + name + "'");
}

void KernelSpec::validate() const {
  check_alpha(n, alpha);
  switch (family) {
    case KernelFamily::hilbert:
      if (n != 1 || alpha != 0.0) throw KernelError("hilbert needs n = 1, alpha = 0");
      break;
    case KernelFamily::cauchy:
      if (n != 2 || alpha != 1.0) throw KernelError("cauchy needs n = 2, alpha = 1");
      break;
    case KernelFamily::riesz_component:
      if (component < 0 || component >= n) throw KernelError("riesz component out of range");
      break;
    case KernelFamily::riesz_vector:
      break;
  }
  if (!(truncation >= 0.0)) throw KernelError("truncation must be nonnegative");
}

int KernelSpec::components() const {
  switch (family) {
    case KernelFamily::riesz_vector: return n;
    case KernelFamily::cauchy: return 2;
    default: return 1;
  }
}

std::string KernelSpec::name() const {
  switch (family) {
    case KernelFamily::hilbert: return "hilbert";
    case KernelFamily::riesz_vector: return "riesz_vector";
    case KernelFamily::cauchy: return "cauchy";
    case KernelFamily::riesz_component: return "riesz:" + std::to_string(component);
  }
  return {};
}

KernelValue kernel_eval(const KernelSpec& k, const Eigen::Ref<const Point>& x, const Eigen::Ref<const Point>& y) {
  const Point d = x - y;
  const double r = d.norm();
  if (r == 0.0) throw KernelError("kernel evaluated on the diagonal");
  KernelValue out;
  out.value = Eigen::VectorXd::Zero(k.components());
  if (r <= k.truncation) {
    out.truncated = true;
    return out;
  }
  const double denom = std::pow(r, k.n + 1 - k.alpha);
  switch (k.family) {
    case KernelFamily::hilbert:
      out.value[0] = 1.0 / (y[0] - x[0]);
      break;
    case KernelFamily::riesz_component:
      out.value[0] = d[k.component] / denom;
      break;
    case KernelFamily::riesz_vector:
      out.value = d / denom;
      break;
    case KernelFamily::cauchy:
      out.value[0] = d[0] / denom;
      out.value[1] = -d[1] / denom;
      break;
  }
  return out;
}

Eigen::VectorXd apply(const KernelSpec& k, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                      const Eigen::Ref<const Point>& y) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(k.components());
  for (int i = 0; i < sigma.size(); ++i) {
    if (f[i] == 0.0) continue;
    s += f[i] * sigma.weights[i] * kernel_eval(k, y, sigma.point(i)).value;
  }
  return s;
}

Eigen::VectorXd bilinear_form(const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k,
                              const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  if (!no_common_point_masses(sigma, omega)) throw KernelError("measures share a point mass");
  Eigen::VectorXd s = Eigen::VectorXd::Zero(k.components());
  for (int j = 0; j < omega.size(); ++j) {
    if (g[j] == 0.0) continue;
    s += g[j] * omega.weights[j] * apply(k, sigma, f, omega.point(j));
  }
  return s;
}

Eigen::MatrixXd operator_matrix(const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k) {
  if (!no_common_point_masses(sigma, omega)) throw KernelError("measures share a point mass");
  const int m = omega.size(), c = k.components();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m) * c, sigma.size());
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < sigma.size(); ++i) {
      const Eigen::VectorXd kv = kernel_eval(k, omega.point(j), sigma.point(i)).value;
      const double s = std::sqrt(sigma.weights[i] * omega.weights[j]);
      for (int q = 0; q < c; ++q) a(q * m + j, i) = kv[q] * s;
    }
  }
  return a;
}

NormResult power_iteration(const Eigen::MatrixXd& a, double tol, int max_iter) {
  NormResult res;
  res.dense = false;
  if (a.size() == 0) return res;
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(a.cols(), 1.0, 2.0);
  v.normalize();
  double prev = 0.0;
  res.converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd av = a * v;
    const double sigma = av.norm();
    res.iterations = it;
    res.value = sigma;
    if (sigma == 0.0) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd w = a.transpose() * av;
    v = w / w.norm();
    if (std::abs(sigma - prev) <= tol * sigma) {
      res.converged = true;
      break;
    }
    prev = sigma;
  }
  return res;
}

NormResult largest_singular_value(const Eigen::MatrixXd& a, double tol, int max_iter) {
  if (a.size() == 0) return {};
  if (std::max(a.rows(), a.cols()) > dense_svd_limit) return power_iteration(a, tol, max_iter);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  NormResult res;
  res.value = svd.singularValues()[0];
  return res;
}

NormResult operator_norm(const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k) {
  k.validate();
  return largest_singular_value(operator_matrix(sigma, omega, k));
}

double testing_term(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k,
                    Direction dir, const Cube& q) {
  const AtomicMeasure& src = dir == Direction::forward ? sigma : omega;
  const AtomicMeasure& dst = dir == Direction::forward ? omega : sigma;
  const auto s_atoms = atoms_in(g, src, q);
  const double m = mass(src, s_atoms);
  if (!(m > 0.0)) return 0.0;
  const auto d_atoms = atoms_in(g, dst, q);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(k.components());
  for (int j : d_atoms) {
    Eigen::VectorXd t = Eigen::VectorXd::Zero(k.components());
    for (int i : s_atoms) {
      // the adjoint sees K(y_j, x_i) with y in omega
      const auto kv = dir == Direction::forward ? kernel_eval(k, dst.point(j), src.point(i))
                                                : kernel_eval(k, src.point(i), dst.point(j));
      t += src.weights[i] * kv.value;
    }
    acc += dst.weights[j] * t.cwiseAbs2();
  }
  const double num = dir == Direction::forward ? acc.sum() : acc.maxCoeff();
  return std::sqrt(num / m);
}

TestingResult testing_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                               const KernelSpec& k, Direction dir, const std::vector<Cube>& cubes) {
  if (cubes.empty()) throw KernelError("empty cube enumeration");
  k.validate();
  TestingResult res;
  res.enumerated = cubes.size();
  res.witness = cubes.front();
  for (const auto& q : cubes) {
    const double t = testing_term(g, sigma, omega, k, dir, q);
    if (t > res.value) {
      res.value = t;
      res.witness = q;
    }
  }
  return res;
}

TestingResult testing_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                               const KernelSpec& k, Direction dir) {
  return testing_constant(g, sigma, omega, k, dir, window_cubes(g, sigma, omega));
}

}  // namespace twl
