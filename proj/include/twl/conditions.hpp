#pragma once

#include "twl/haar.hpp"
#include "twl/kernel.hpp"

namespace twl {

enum class A2Kind { two_tailed, tailless };

struct CubeWitness {
  double value = 0.0;
  Cube cube;
};

double a2_term(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha, A2Kind kind,
               Direction dir, const Cube& q);
CubeWitness a2_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                        A2Kind kind, Direction dir, const std::vector<Cube>& cubes);
CubeWitness a2_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                        A2Kind kind, Direction dir);

// c with tailless(Q) <= c * two_tailed(Q) for every cube: (1 + sqrt(n)/2)^(2(n - alpha))
double a2_tailless_factor(int n, double alpha);

// cubes where the tailless term exceeds the two-tailed one (either direction)
std::vector<Cube> a2_order_violations(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                      double alpha, const std::vector<Cube>& cubes, double factor = 1.0);

// hole: P(Q_r, 1_{Q \ Q_r} sigma); plugged: P(Q_r, 1_Q sigma)
enum class EnergyKind { hole, plugged };

struct EnergyResult {
  double value = 0.0;    // the constant itself (square root of the optimum)
  double squared = 0.0;
  Cube top;
  std::vector<Cube> pieces;
};

// single-piece score (P(r, .)/l(r))^2 ||P_r x||^2 inside top
double energy_piece(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                    EnergyKind kind, const Cube& top, const Cube& piece);
// (1/|top|_sigma) sum of piece scores; zero pieces dropped, the rest summed in sorted order
double evaluate_subpartition(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                             EnergyKind kind, const Cube& top, std::vector<Cube> pieces);

// depth < 0 means unbounded; dual swaps sigma and omega
EnergyResult energy_constant(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                             Direction dir, int depth, EnergyKind kind = EnergyKind::hole);

// An F-adapted family: for each F its collection J(F) and the coefficients of g_F.
struct AdaptedFamily {
  std::vector<Cube> tops;
  std::vector<std::vector<Cube>> collections;
  std::vector<CoefficientMap> coefficients;
};

struct AdaptedReport {
  bool coefficients_ok = true;  // nonnegative, supported in J(F)
  bool embedded_ok = true;      // J(F) consists of cubes deeply embedded in F
  bool disjoint_ok = true;
  int overlap = 0;              // the constant of the straddling overlap bound
  std::vector<std::string> violations;
  bool ok() const { return coefficients_ok && embedded_ok && disjoint_ok; }
};

AdaptedReport f_adapted_check(const GridSpec& g, const AdaptedFamily& fam, double tol = 1e-12);

std::vector<Cube> maximal_cubes(std::vector<Cube> cubes);

HalfSpaceMeasure functional_energy_mu(const GridSpec& g, const AtomicMeasure& omega, const AdaptedFamily& fam);

struct PoissonTesting {
  double lhs1 = 0.0, rhs1 = 0.0, lhs2 = 0.0, rhs2 = 0.0;
};

PoissonTesting poisson_testing_check(const GridSpec& g, const HalfSpaceMeasure& mu, const AtomicMeasure& sigma,
                                     const Cube& i, double alpha, double a2_tailless, double a2, double energy);

struct ConstantReport {
  double A2 = 0, A2_star = 0, A2_tailless = 0;
  double T = 0, T_star = 0;
  double E = 0, E_star = 0;
  CubeWitness w_A2, w_A2_star, w_A2_tailless;
  TestingResult w_T, w_T_star;
  EnergyResult w_E, w_E_star;
  std::size_t enumerated = 0;
};

ConstantReport compute_constants(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                 const KernelSpec& k, int energy_depth = -1);

}  // namespace twl
