#pragma once

#include "twl/tree.hpp"

#include <string>

namespace twl {

enum class KernelFamily { hilbert, riesz_component, riesz_vector, cauchy };

struct KernelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KernelSpec {
  KernelFamily family = KernelFamily::hilbert;
  int n = 1;
  double alpha = 0.0;
  int component = 0;        // riesz_component only
  double truncation = 0.0;  // contributions with |x - y| <= truncation are dropped

  static KernelSpec hilbert() { return {}; }
  static KernelSpec riesz(int n, double alpha, int j) { return {KernelFamily::riesz_component, n, alpha, j, 0.0}; }
  static KernelSpec riesz_vector(int n, double alpha) { return {KernelFamily::riesz_vector, n, alpha, 0, 0.0}; }
  static KernelSpec cauchy() { return {KernelFamily::cauchy, 2, 1.0, 0, 0.0}; }
  // "hilbert", "riesz_vector", "cauchy", "riesz:<j>"
  static KernelSpec parse(const std::string& name, int n, double alpha);

  void validate() const;
  int components() const;
  std::string name() const;
};

struct KernelValue {
  Eigen::VectorXd value;
  bool truncated = false;
};

// K(x, y); throws KernelError when x == y
KernelValue kernel_eval(const KernelSpec& k, const Eigen::Ref<const Point>& x, const Eigen::Ref<const Point>& y);

// T(f sigma)(y), one entry per component
Eigen::VectorXd apply(const KernelSpec& k, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                      const Eigen::Ref<const Point>& y);

// <T_sigma f, g>_omega per component
Eigen::VectorXd bilinear_form(const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k,
                              const Eigen::VectorXd& f, const Eigen::VectorXd& g);

// rows (component c, omega atom j) at c * |omega| + j, columns sigma atoms:
// K_c(y_j, x_i) sqrt(w_i v_j)
Eigen::MatrixXd operator_matrix(const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k);

struct NormResult {
  double value = 0.0;
  bool converged = true;
  int iterations = 0;
  bool dense = true;
};

inline constexpr Eigen::Index dense_svd_limit = 512;

NormResult largest_singular_value(const Eigen::MatrixXd& a, double tol = 1e-10, int max_iter = 10000);
NormResult power_iteration(const Eigen::MatrixXd& a, double tol = 1e-10, int max_iter = 10000);

NormResult operator_norm(const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k);

enum class Direction { forward, dual };

struct TestingResult {
  double value = 0.0;
  Cube witness;
  std::size_t enumerated = 0;
};

double testing_term(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, const KernelSpec& k,
                    Direction dir, const Cube& q);
TestingResult testing_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                               const KernelSpec& k, Direction dir, const std::vector<Cube>& cubes);
// default enumeration: window_cubes of the pair
TestingResult testing_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                               const KernelSpec& k, Direction dir);

}  // namespace twl
