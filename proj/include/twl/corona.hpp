#pragma once

#include "twl/conditions.hpp"

namespace twl {

// A stopping tree. cubes[0] is the root; every cube comes after its parent.
struct StoppingData {
  std::vector<Cube> cubes;
  std::vector<int> parent;
  std::vector<double> alpha;
  double C0 = 4.0;

  int size() const { return static_cast<int>(cubes.size()); }
  const Cube& root() const { return cubes.front(); }
  int index(const Cube& q) const;
  // smallest stopping cube containing q, -1 outside the root
  int owner(const Cube& q) const;
  std::vector<int> kids(int f) const;
  int generation(int f) const;
};

// Links an unordered list of cubes (one of which contains all others).
StoppingData make_stopping_data(std::vector<std::pair<Cube, double>> cubes, double C0);

double average(const AtomicMeasure& sigma, const Eigen::VectorXd& f, std::span<const int> atoms);
double average_abs(const AtomicMeasure& sigma, const Eigen::VectorXd& f, std::span<const int> atoms);

// sigma-tree nodes in the corona of stopping cube f
std::vector<Cube> corona_cubes(const CubeTree& tree, const StoppingData& s, int f);

struct CzStopping {
  StoppingData data;
  double ratio = 4.0;     // C
  double carleson = 0.0;  // C / (C - 1)
  double quasi = 0.0;     // C0' of the quasiorthogonality bound
};

// Stops at the maximal Q strictly inside F with E_Q|f| > C E_F|f|;
// alpha(F) = C E_F|f|.
CzStopping cz_stopping_times(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f, double C,
                             std::optional<Cube> root = std::nullopt);

struct StoppingCheck {
  bool averages = true;   // (1)
  bool carleson = true;   // (2)
  bool l2 = true;         // (3)
  bool monotone = true;   // (4)
  double average_ratio = 0.0;   // max E_I|f| / alpha
  double carleson_ratio = 0.0;  // max sum_{F' <= F} |F'| / |F|
  double l2_ratio = 0.0;        // sum alpha^2 |F| / ||f||^2
  bool ok() const { return averages && carleson && l2 && monotone; }
};

StoppingCheck check_stopping_data(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                                  const StoppingData& s);

// ||sum alpha(F) 1_F||^2 / ||f||^2
double quasiorthogonality(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                          const StoppingData& s);

// entry m: max over F of sum_{m-th generation F'} |F'| / |F|
std::vector<double> carleson_generations(const GridSpec& g, const AtomicMeasure& sigma, const StoppingData& s);

// inner[i] is stopping data for the corona projection of stopping cube i
StoppingData iterate_coronas(const StoppingData& outer, const std::vector<StoppingData>& inner);

struct EnergyCorona {
  StoppingData data;                 // alpha left at zero
  std::vector<double> stopping_energy;  // X(C_S) per stopping cube
  double carleson_ratio = 0.0;       // max over I of sum_{S in I} |S| / |I|
  int empty_families = 0;            // scanned cubes with no good deeply embedded subcube
};

// maximal good J deeply embedded in I among the nodes of `tree`
std::vector<int> maximal_embedded(const CubeTree& tree, int i);

// sum over M(I) of |J|_omega E(J)^2 P(J, 1_top sigma)^2, top a node index
double embedded_energy(const CubeTree& tree, int i, int top, double alpha);

EnergyCorona energy_corona(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, double alpha,
                           const Cube& s0, double energy, double factor = 10.0);

struct FluctuationSplit {
  Eigen::VectorXd part1, part2;
  std::vector<Cube> big;
  double bound1 = 0.0;  // (C gamma + gamma + 1) E_F|f|
  double scale2 = 0.0;  // (C + 1) E_F|f|
};

// cz.ratio plays the role of the CZ stopping constant
FluctuationSplit bounded_fluctuation_split(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                                           const CzStopping& cz, int f_index, double gamma);

struct FluctuationCheck {
  bool support = true;   // h vanishes off the family
  bool constant = true;  // h is constant with |value| > gamma on each family cube
  bool averages = true;  // averages of |h| at most 1 above the family
  bool mean_zero = false;
  std::vector<Cube> family;
  bool ok() const { return support && constant && averages; }
};

FluctuationCheck gbf_check(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& h, const Cube& k,
                           double gamma);

struct ParallelSplit {
  std::vector<std::pair<int, int>> near, disjoint, far;
};

ParallelSplit parallel_split(const StoppingData& f, const StoppingData& g);

struct DoubleCorona {
  CzStopping cz;
  std::vector<EnergyCorona> energy;
  StoppingData result;
  double energy_constant = 0.0;
  double C1 = 0.0;
};

DoubleCorona double_corona(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                           const Eigen::VectorXd& f, double alpha, double C);

// sum over stopping cubes of the corona projections, plus the root mean
Eigen::VectorXd corona_reconstruction(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                                      const StoppingData& s);

}  // namespace twl
