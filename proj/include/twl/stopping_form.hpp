#pragma once

#include "twl/conditions.hpp"

namespace twl {

struct Pair {
  Cube I, J;
  auto operator<=>(const Pair&) const = default;
  bool operator==(const Pair&) const = default;
};

// Pairs (I, J) for a root A; kept sorted and unique.
struct PairCollection {
  Cube root;
  std::vector<Pair> pairs;

  void normalize();
  bool empty() const { return pairs.empty(); }
  std::size_t size() const { return pairs.size(); }
  std::vector<Cube> first() const;   // pi_1
  std::vector<Cube> second() const;  // pi_2
  std::vector<Cube> all() const;     // pi_1 union pi_2
};

struct Admissibility {
  bool embedded = true;  // J good, deeply embedded in I, I inside A
  bool geodesic = true;  // closed along geodesics
  std::vector<std::string> violations;
  bool ok() const { return embedded && geodesic; }
};

Admissibility check_admissible(const GridSpec& g, const PairCollection& p);

// omega_P: weight X(J)^2 at (c_J, l(J)) for every J in pi_2 P
struct TentMeasure {
  std::vector<Cube> cubes;  // sorted
  std::vector<double> weights;

  // sum of the weights of the J inside K, in sorted order
  double mass(const Cube& k) const;
  HalfSpaceMeasure atoms(const GridSpec& g) const;
};

TentMeasure tent_measure(const GridSpec& g, const AtomicMeasure& omega, const PairCollection& p);

// omega_P of the closed pyramid over K with apex (c_K, l(K))
double tent_mass_geometric(const GridSpec& g, const HalfSpaceMeasure& atoms, const Cube& k);

// (1/|K|_sigma) (P(K, 1_{A \ K} sigma) / l(K))^2 omega_P(T(K)); zero when |K|_sigma = 0
double size_term(const GridSpec& g, const AtomicMeasure& sigma, const TentMeasure& tent, const Cube& a, const Cube& k,
                 double alpha);

struct SizeResult {
  double value = 0.0;  // the squared size
  Cube witness;
  int skipped = 0;     // first coordinates without sigma mass
};

SizeResult size_functional(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                           const PairCollection& p, double alpha);

struct SizeDecomposition {
  double eps = 0.0;
  double size = 0.0;
  PairCollection big;
  std::vector<PairCollection> small;
  PairCollection except;
  std::vector<std::vector<Cube>> generations;
};

// growth ratio rho = 1 + eps
SizeDecomposition size_lemma_decompose(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                       const PairCollection& p, double alpha, double eps);

// pieces are disjoint and their union is p
bool is_partition(const PairCollection& p, const SizeDecomposition& d);

struct Straddle {
  bool holds = true;
  bool case_in = true;
  bool case_out = true;
};

Straddle straddles(const GridSpec& g, const PairCollection& p, const std::vector<Cube>& s);

enum class EtaSide { in, out };

// squared eta_in / eta_out, sup over S with sigma mass
double eta_squared(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega, const PairCollection& p,
                   const std::vector<Cube>& s, double alpha, EtaSide side);

// B(f, g) per kernel component
Eigen::VectorXd stopping_form(const GridSpec& grid, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                              const PairCollection& p, const Eigen::VectorXd& f, const Eigen::VectorXd& g,
                              const KernelSpec& k);

// Matrix of the form in Haar coordinates: rows (component, J, a), columns
// (parent of I, b).
struct StoppingFormMatrix {
  Eigen::MatrixXd m;
  std::vector<HaarKey> rows;  // one block of rows per component
  std::vector<HaarKey> cols;
  int components = 1;
};

StoppingFormMatrix stopping_form_matrix(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                        const PairCollection& p, const KernelSpec& k);

NormResult stopping_form_norm(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                              const PairCollection& p, const KernelSpec& k);

}  // namespace twl
