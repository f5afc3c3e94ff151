#pragma once

#include "twl/io.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>

namespace twl {

// mt19937_64 with a fixed uniform mapping, so draws do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  explicit Rng(std::seed_seq& s) : eng_(s) {}
  // seed, then a stream of tags
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

  double uniform();  // [0, 1)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  int below(int n);  // [0, n)
  bool coin(double p = 0.5) { return uniform() < p; }
  double log_uniform(double lo, double hi);
  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

struct KernelCase {
  std::string kernel = "hilbert";
  int n = 1;
  double alpha = 0.0;

  KernelSpec spec() const { return KernelSpec::parse(kernel, n, alpha); }
};

std::vector<KernelCase> default_kernel_cases();

struct RunConfig {
  std::uint64_t seed = 271828;
  int sigma_atoms = 12;
  int omega_atoms = 12;
  GridSpec grid;              // n and shift follow each kernel case
  std::vector<KernelCase> kernels = default_kernel_cases();
  std::vector<std::string> suites;  // empty selects every suite
  int pairs = 200;
  int peculiar_trials = 1000;
  double slack = 1.05;        // calibrated ratios may reach slack * frozen
  double rel_tol = 1e-12;     // rounding allowance on exact inequalities
  std::string calibration = "data/calibration.json";
  std::string out = "report";

  GridSpec grid_for(int n) const;
  json to_json() const;
  static RunConfig from_json(const json& j);
};

std::vector<std::string> all_suites();
std::vector<std::string> calibrated_suites();

// Atoms on the lattice 2^k_min of [0,1)^n, distinct and with disjoint
// supports, weights log-uniform in [1e-2, 1e2].
std::pair<AtomicMeasure, AtomicMeasure> generate(const GridSpec& g, int sigma_atoms, int omega_atoms, Rng& rng);
// Most atoms fall in a few good cubes of side 2^-9 .. 2^-6, so that deep
// embedding and the constructions built on it have material to work with.
std::pair<AtomicMeasure, AtomicMeasure> generate_clustered(const GridSpec& g, int sigma_atoms, int omega_atoms,
                                                           Rng& rng, int clusters = 3);
// pair number i of a kernel case
std::pair<AtomicMeasure, AtomicMeasure> golden_pair(const RunConfig& c, const KernelCase& k, int i);

// Random admissible collection over the bounding cube of the pair: every
// charged J picks a contiguous run of ancestors I with J good and deeply
// embedded in I.
PairCollection random_admissible_pairs(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                       Rng& rng, double density = 0.6);

// Runs f(0..count-1), at most TWL_THREADS at a time.
void parallel_for(int count, const std::function<void(int)>& f);
int thread_count();

struct PeculiarTrial {
  double lhs = 0.0, rhs = 0.0, eta = 0.0;
  bool degenerate = false;
};

// |<K_y,h_J> + <x,h_J>/|y-c_J|^2| against (eta-1)^-1 <x,h_J>/|y-c_J|^2,
// with K_y(x) = 1/(x - y)
PeculiarTrial peculiar_terms(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, double y);

struct SuiteRecord {
  std::string name, kernel;
  int n = 1;
  double alpha = 0.0;
  int instances = 0;
  int skipped = 0;
  double max_ratio = 0.0;
  std::optional<double> frozen;
  std::optional<double> limit;
  int violations = 0;
  bool calibrated = false;
  json details = json::object();
  json witness = json::object();
};

struct Report {
  json config;
  std::vector<SuiteRecord> suites;
  bool ok() const;
  json to_json() const;
  std::string csv() const;
};

// Calibration table: constants[suite][kernel]
struct Calibration {
  json provenance = json::object();
  std::map<std::string, std::map<std::string, double>> constants;

  std::optional<double> get(const std::string& suite, const std::string& kernel) const;
  json to_json() const;
  static Calibration from_json(const json& j);
};

// Without a calibration table the calibrated suites only measure.
Report run_suites(const RunConfig& c, const Calibration* cal);
Calibration calibrate(const RunConfig& c);
void write_report(const Report& r, const std::string& out);

}  // namespace twl
