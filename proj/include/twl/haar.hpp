#pragma once

#include "twl/tree.hpp"

#include <map>

namespace twl {

// Haar label a in {0,1}^n minus (1,...,1); bit i is a_i.
using HaarLabel = unsigned;

std::vector<HaarLabel> haar_labels(int n);
// 0 in slot l, 1 elsewhere
HaarLabel coordinate_label(int n, int l);

// A child-constant function on Q. values[j] is the value on child slot j.
struct HaarFunction {
  Cube cube;
  HaarLabel label = 0;
  Eigen::VectorXd values;
};

// Unnormalized sign pattern a(Q_beta/Q) of the explicit construction.
double haar_sign(HaarLabel a, unsigned beta, int n);

// Explicit Haar function for label a on a cube whose children all carry mass.
Eigen::VectorXd explicit_haar(const Eigen::VectorXd& child_masses, HaarLabel a, int n);

// Orthonormal mean-zero basis of the child-constant functions on q.
std::vector<HaarFunction> haar_basis(const Cube& q, const Eigen::VectorXd& child_masses);

Eigen::VectorXd child_masses(const GridSpec& g, const AtomicMeasure& mu, const Cube& q, std::span<const int> atoms);
Eigen::VectorXd child_masses(const GridSpec& g, const AtomicMeasure& mu, const Cube& q);

std::vector<HaarFunction> haar_system(const GridSpec& g, const AtomicMeasure& mu, const Cube& q);

// h evaluated at every atom of mu (zero outside h.cube)
Eigen::VectorXd evaluate(const GridSpec& g, const HaarFunction& h, const AtomicMeasure& mu);
double inner(const GridSpec& g, const HaarFunction& h, const AtomicMeasure& mu, const Eigen::VectorXd& f);

// Delta_Q f on the atoms of mu
Eigen::VectorXd martingale_difference(const GridSpec& g, const AtomicMeasure& mu, const Eigen::VectorXd& f,
                                      const Cube& q);

struct HaarKey {
  Cube cube;
  HaarLabel label = 0;
  auto operator<=>(const HaarKey&) const = default;
  bool operator==(const HaarKey&) const = default;
};

using CoefficientMap = std::map<HaarKey, double>;

struct HaarExpansion {
  Cube root;
  double mean = 0.0;       // average of f over root
  double root_mass = 0.0;
  CoefficientMap coefficients;
  bool lossy = false;      // depth stopped above the separating depth
};

// depth < 0 expands down to the separating depth (or the window floor)
HaarExpansion analyze(const GridSpec& g, const AtomicMeasure& mu, const Eigen::VectorXd& f, int depth = -1);
Eigen::VectorXd synthesize(const GridSpec& g, const AtomicMeasure& mu, const HaarExpansion& e);

Eigen::VectorXd corona_projection(const GridSpec& g, const AtomicMeasure& mu, const Eigen::VectorXd& f,
                                  std::span<const Cube> cubes);

// (1/|J|) int |x - E_J x|^2 / l(J)^2 d omega
double energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j);
double energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms);
// E_x E_z |x - z|^2 / l(J)^2, equal to 2 * energy
double pair_energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j);
// int_J |x - E_J x|^2 d omega = ||P_J x||^2 over all Haar cubes inside J
double variance(const AtomicMeasure& omega, std::span<const int> atoms);

// sum_l ||Delta_J x^l||^2 = sum_a sum_l <x^l, h^a>^2
double haar_x_energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms);
double haar_x_energy(const GridSpec& g, const AtomicMeasure& omega, const Cube& j);

// ||P_H x||^2
double projection_norm(const GridSpec& g, const AtomicMeasure& omega, std::span<const Cube> cubes);

// sum_l <x^l - c_J^l, h_J^{e_l}>
double x_hat(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms);
double x_hat(const GridSpec& g, const AtomicMeasure& omega, const Cube& j);
// per-coordinate terms of x_hat
Eigen::VectorXd x_hat_terms(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, std::span<const int> atoms);

}  // namespace twl
