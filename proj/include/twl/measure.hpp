#pragma once

#include "twl/dyadic.hpp"

#include <span>

namespace twl {

// Finite sum of weighted point masses; column i of `points` is atom i.
struct AtomicMeasure {
  int n = 1;
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;

  AtomicMeasure() = default;
  explicit AtomicMeasure(int dim) : n(dim), points(dim, 0), weights(0) {}
  AtomicMeasure(Eigen::MatrixXd pts, Eigen::VectorXd w);

  int size() const { return static_cast<int>(weights.size()); }
  bool empty() const { return weights.size() == 0; }
  auto point(int i) const { return points.col(i); }
  double total() const { return weights.sum(); }

  void add(const Eigen::Ref<const Point>& x, double w);
  // distinct points, strictly positive weights
  void validate() const;
  AtomicMeasure scaled(double c) const;
};

// Atoms (x, t) in the upper half space.
struct HalfSpaceMeasure {
  int n = 1;
  Eigen::MatrixXd points;
  Eigen::VectorXd heights;
  Eigen::VectorXd weights;

  explicit HalfSpaceMeasure(int dim = 1) : n(dim), points(dim, 0), heights(0), weights(0) {}
  int size() const { return static_cast<int>(weights.size()); }
  void add(const Eigen::Ref<const Point>& x, double t, double w);
};

enum class PoissonKind { standard, conformal };

std::vector<int> atoms_in(const GridSpec& g, const AtomicMeasure& mu, const Cube& q);
double mass(const GridSpec& g, const AtomicMeasure& mu, const Cube& q);
double mass(const AtomicMeasure& mu, std::span<const int> atoms);

bool no_common_point_masses(const AtomicMeasure& sigma, const AtomicMeasure& omega);

// One atom's contribution, centre c and side l.
double poisson_kernel(const Eigen::Ref<const Point>& c, double l, const Eigen::Ref<const Point>& x, int n,
                      double alpha, PoissonKind kind);

// P^alpha (standard) or the conformal variant used in A2, summed over all atoms.
double poisson(const GridSpec& g, const Cube& q, const AtomicMeasure& mu, double alpha,
               PoissonKind kind = PoissonKind::standard);
// same, restricted to the listed atoms
double poisson(const GridSpec& g, const Cube& q, const AtomicMeasure& mu, std::span<const int> atoms,
               double alpha, PoissonKind kind = PoissonKind::standard);

double poisson_tilde(const GridSpec& g, const Cube& k, const AtomicMeasure& mu);

double halfspace_poisson(const AtomicMeasure& nu, const Eigen::Ref<const Point>& x, double t, double alpha);
double halfspace_poisson(const AtomicMeasure& nu, std::span<const int> atoms, const Eigen::Ref<const Point>& x,
                         double t, double alpha);

// box over I: x in I, 0 <= t <= side(I)
bool in_box(const GridSpec& g, const Cube& i, const Eigen::Ref<const Point>& x, double t);

double dual_halfspace_poisson(const HalfSpaceMeasure& mu, const Eigen::Ref<const Point>& x, double alpha,
                              const GridSpec& g, const Cube& box);

void check_alpha(int n, double alpha);

}  // namespace twl
