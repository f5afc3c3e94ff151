#include "twl/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace twl {

void check_alpha(int n, double alpha) {
  if (!(alpha >= 0.0 && alpha < n)) throw std::invalid_argument("alpha must satisfy 0 <= alpha < n");
}

AtomicMeasure::AtomicMeasure(Eigen::MatrixXd pts, Eigen::VectorXd w)
    : n(static_cast<int>(pts.rows())), points(std::move(pts)), weights(std::move(w)) {
  if (points.cols() != weights.size()) throw std::invalid_argument("atom count mismatch");
}

void AtomicMeasure::add(const Eigen::Ref<const Point>& x, double w) {
  if (x.size() != n) throw std::invalid_argument("atom has wrong dimension");
  const auto k = points.cols();
  points.conservativeResize(n, k + 1);
  points.col(k) = x;
  weights.conservativeResize(k + 1);
  weights[k] = w;
}

void AtomicMeasure::validate() const {
  if (points.rows() != n || points.cols() != weights.size()) throw std::invalid_argument("malformed measure");
  std::set<std::vector<double>> seen;
  for (int i = 0; i < size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw std::invalid_argument("atom weights must be positive");
    std::vector<double> key(points.col(i).data(), points.col(i).data() + n);
    if (!seen.insert(key).second) throw std::invalid_argument("atoms must be distinct");
  }
}

AtomicMeasure AtomicMeasure::scaled(double c) const { return AtomicMeasure(points, c * weights); }

void HalfSpaceMeasure::add(const Eigen::Ref<const Point>& x, double t, double w) {
  if (!(t > 0.0)) throw std::invalid_argument("half-space atoms need t > 0");
  const auto k = points.cols();
  points.conservativeResize(n, k + 1);
  points.col(k) = x;
  heights.conservativeResize(k + 1);
  heights[k] = t;
  weights.conservativeResize(k + 1);
  weights[k] = w;
}

std::vector<int> atoms_in(const GridSpec& g, const AtomicMeasure& mu, const Cube& q) {
  std::vector<int> out;
  for (int i = 0; i < mu.size(); ++i) {
    if (contains(g, q, mu.point(i))) out.push_back(i);
  }
  return out;
}

double mass(const GridSpec& g, const AtomicMeasure& mu, const Cube& q) {
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (contains(g, q, mu.point(i))) s += mu.weights[i];
  }
  return s;
}

double mass(const AtomicMeasure& mu, std::span<const int> atoms) {
  double s = 0.0;
  for (int i : atoms) s += mu.weights[i];
  return s;
}

bool no_common_point_masses(const AtomicMeasure& sigma, const AtomicMeasure& omega) {
  std::set<std::vector<double>> pts;
  for (int i = 0; i < sigma.size(); ++i) pts.emplace(sigma.point(i).data(), sigma.point(i).data() + sigma.n);
  for (int j = 0; j < omega.size(); ++j) {
    if (pts.count(std::vector<double>(omega.point(j).data(), omega.point(j).data() + omega.n))) return false;
  }
  return true;
}

double poisson_kernel(const Eigen::Ref<const Point>& c, double l, const Eigen::Ref<const Point>& x, int n,
                      double alpha, PoissonKind kind) {
  const double d = (x - c).norm();
  if (kind == PoissonKind::standard) return l / std::pow(l + d, n + 1 - alpha);
  return std::pow(l / ((l + d) * (l + d)), n - alpha);
}

double poisson(const GridSpec& g, const Cube& q, const AtomicMeasure& mu, double alpha, PoissonKind kind) {
  check_alpha(g.n, alpha);
  const Point c = center(g, q);
  const double l = side(q);
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) s += mu.weights[i] * poisson_kernel(c, l, mu.point(i), g.n, alpha, kind);
  return s;
}

double poisson(const GridSpec& g, const Cube& q, const AtomicMeasure& mu, std::span<const int> atoms, double alpha,
               PoissonKind kind) {
  check_alpha(g.n, alpha);
  const Point c = center(g, q);
  const double l = side(q);
  double s = 0.0;
  for (int i : atoms) s += mu.weights[i] * poisson_kernel(c, l, mu.point(i), g.n, alpha, kind);
  return s;
}

double poisson_tilde(const GridSpec& g, const Cube& k, const AtomicMeasure& mu) {
  if (g.n != 1) throw std::invalid_argument("poisson_tilde is one-dimensional");
  const double c = center(g, k)[0];
  const double l = side(k);
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    const double d = l + std::abs(mu.points(0, i) - c);
    s += mu.weights[i] * l * l / (d * d * d);
  }
  return s;
}

double halfspace_poisson(const AtomicMeasure& nu, const Eigen::Ref<const Point>& x, double t, double alpha) {
  if (!(t > 0.0)) throw std::invalid_argument("half-space Poisson needs t > 0");
  const double e = 0.5 * (nu.n + 1 - alpha);
  double s = 0.0;
  for (int i = 0; i < nu.size(); ++i) {
    s += nu.weights[i] * t / std::pow(t * t + (x - nu.point(i)).squaredNorm(), e);
  }
  return s;
}

double halfspace_poisson(const AtomicMeasure& nu, std::span<const int> atoms, const Eigen::Ref<const Point>& x,
                         double t, double alpha) {
  if (!(t > 0.0)) throw std::invalid_argument("half-space Poisson needs t > 0");
  const double e = 0.5 * (nu.n + 1 - alpha);
  double s = 0.0;
  for (int i : atoms) s += nu.weights[i] * t / std::pow(t * t + (x - nu.point(i)).squaredNorm(), e);
  return s;
}

bool in_box(const GridSpec& g, const Cube& i, const Eigen::Ref<const Point>& x, double t) {
  return t >= 0.0 && t <= side(i) && contains(g, i, x);
}

double dual_halfspace_poisson(const HalfSpaceMeasure& mu, const Eigen::Ref<const Point>& x, double alpha,
                              const GridSpec& g, const Cube& box) {
  const double e = 0.5 * (mu.n + 1 - alpha);
  double s = 0.0;
  for (int k = 0; k < mu.size(); ++k) {
    const double t = mu.heights[k];
    if (!in_box(g, box, mu.points.col(k), t)) continue;
    s += mu.weights[k] * t * t / std::pow(t * t + (x - mu.points.col(k)).squaredNorm(), e);
  }
  return s;
}

}  // namespace twl
