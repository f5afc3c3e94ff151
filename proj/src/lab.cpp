#include "twl/lab.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace twl {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : std::string("nan");
}

bool selected(const RunConfig& c, const std::string& s) {
  return c.suites.empty() || std::find(c.suites.begin(), c.suites.end(), s) != c.suites.end();
}

AtomicMeasure dilate(const AtomicMeasure& mu, const Point& c, double factor) {
  AtomicMeasure out(mu.n);
  for (int i = 0; i < mu.size(); ++i) out.add(c + factor * (mu.point(i) - c), mu.weights[i]);
  return out;
}

// atoms of mu outside the closed cube 2Q
AtomicMeasure outside_double(const GridSpec& g, const AtomicMeasure& mu, const Cube& q) {
  const Point c = center(g, q);
  AtomicMeasure out(mu.n);
  for (int i = 0; i < mu.size(); ++i) {
    if ((mu.point(i) - c).lpNorm<Eigen::Infinity>() > side(q)) out.add(mu.point(i), mu.weights[i]);
  }
  return out;
}

int charged_children(const CubeTree::Node& nd) {
  return static_cast<int>(std::count_if(nd.children.begin(), nd.children.end(), [](int c) { return c >= 0; }));
}

// <T(f nu), psi>_omega, Euclidean norm over components
double pairing_norm(const KernelSpec& k, const AtomicMeasure& nu, const Eigen::VectorXd& f,
                    const AtomicMeasure& omega, const Eigen::VectorXd& psi) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(k.components());
  for (int j = 0; j < omega.size(); ++j) {
    if (psi[j] != 0.0) s += omega.weights[j] * psi[j] * apply(k, nu, f, omega.point(j));
  }
  return s.norm();
}

constexpr int separations = 4;

struct PairResult {
  std::vector<double> mono, energy;  // per dilation 2^s
  double mono_best = 0.0, energy_best = 0.0;
  int mono_n = 0, mono_skip = 0, energy_n = 0, energy_skip = 0;
  json mono_w, energy_w;
  double decay = 0.0;
  int decay_n = 0, decay_skip = 0;
  json decay_w;
  bool have_theorem = false;
  double theorem = 0.0, necessity = 0.0, energy_norm = 0.0;
  double T = 0, T_star = 0, N = 0;
  json theorem_w;
};

void monotonicity_trials(const GridSpec& g, const KernelSpec& k, const AtomicMeasure& sigma,
                         const AtomicMeasure& omega, PairResult& r) {
  r.mono.assign(separations, 0.0);
  const AtomicMeasure none(g.n);
  const CubeTree wt(g, none, omega);
  const int full = 1 << g.n;
  for (const auto& nd : wt.nodes()) {
    if (nd.omega_atoms.size() < 2) continue;
    if (charged_children(nd) < full) {
      ++r.mono_skip;
      continue;
    }
    const Cube& j = nd.cube;
    const AtomicMeasure mu = outside_double(g, sigma, j);
    const double x = x_hat(g, omega, j);
    if (mu.empty() || !(x > 0.0)) {
      ++r.mono_skip;
      continue;
    }
    std::vector<Eigen::VectorXd> hv;
    for (const auto& h : haar_system(g, omega, j)) hv.push_back(evaluate(g, h, omega));
    const Point c = center(g, j);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(mu.size());
    ++r.mono_n;
    for (int s = 0; s < separations; ++s) {
      const AtomicMeasure ms = dilate(mu, c, std::ldexp(1.0, s));
      double best = 0.0;
      for (const auto& v : hv) best = std::max(best, pairing_norm(k, ms, ones, omega, v));
      const double ratio = best / (poisson(g, j, ms, k.alpha) / side(j) * x);
      r.mono[s] = std::max(r.mono[s], ratio);
      if (ratio > r.mono_best) {
        r.mono_best = ratio;
        r.mono_w = {{"J", to_json(j)}, {"dilation", std::ldexp(1.0, s)}};
      }
    }
  }
}

void energy_trials(const GridSpec& g, const KernelSpec& k, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                   Rng& rng, PairResult& r) {
  r.energy.assign(separations, 0.0);
  const AtomicMeasure none(g.n);
  const CubeTree wt(g, none, omega);
  for (const auto& nd : wt.nodes()) {
    if (charged_children(nd) < 2) continue;
    const Cube& j = nd.cube;
    const AtomicMeasure nu = outside_double(g, sigma, j);
    if (nu.empty()) {
      ++r.energy_skip;
      continue;
    }
    Eigen::VectorXd signs(nu.size());
    for (int i = 0; i < nu.size(); ++i) signs[i] = rng.coin() ? 1.0 : -1.0;

    std::vector<int> h;
    for (int i : wt.subtree(wt.find(j))) {
      if (charged_children(wt.node(i)) >= 2 && rng.coin()) h.push_back(i);
    }
    if (h.empty()) h.push_back(wt.find(j));
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(omega.size());
    double sum_x = 0.0;
    json hj = json::array();
    for (int i : h) {
      const Cube& q = wt.node(i).cube;
      for (const auto& f : haar_system(g, omega, q)) psi += rng.uniform(-1.0, 1.0) * evaluate(g, f, omega);
      const double x = x_hat(g, omega, q);
      sum_x += x * x;
      hj.push_back(to_json(q));
    }
    const double norm = std::sqrt(omega.weights.dot(psi.cwiseProduct(psi)));
    if (!(sum_x > 0.0) || !(norm > 0.0)) {
      ++r.energy_skip;
      continue;
    }
    ++r.energy_n;
    const Point c = center(g, j);
    for (int s = 0; s < separations; ++s) {
      const AtomicMeasure ns = dilate(nu, c, std::ldexp(1.0, s));
      const double p = poisson(g, j, ns, k.alpha) / side(j);
      const double ratio = pairing_norm(k, ns, signs, omega, psi) / (norm * p * std::sqrt(sum_x));
      r.energy[s] = std::max(r.energy[s], ratio);
      if (ratio > r.energy_best) {
        r.energy_best = ratio;
        r.energy_w = {{"J", to_json(j)}, {"H", hj}, {"dilation", std::ldexp(1.0, s)}};
      }
    }
  }
}

// J ranges over random dyadic subcubes of I a few levels below the
// embedding depth; only good deeply embedded ones count.
void decay_trials(const GridSpec& g, double alpha, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                  Rng& rng, PairResult& r) {
  const CubeTree t(g, sigma, omega);
  const double expo = 2.0 - 2.0 * g.eps * (g.n + 1 - alpha);
  constexpr int samples = 32;
  for (int i = 1; i < t.size(); ++i) {
    const Cube& I = t.node(i).cube;
    std::vector<Cube> hats{parent(I)};
    if (t.root().cube != parent(I)) hats.push_back(t.root().cube);
    for (const auto& hat : hats) {
      std::vector<int> out;
      for (int a = 0; a < sigma.size(); ++a) {
        if (contains(g, hat, sigma.point(a)) && !contains(g, I, sigma.point(a))) out.push_back(a);
      }
      const double pi = out.empty() ? 0.0 : poisson(g, I, sigma, out, alpha);
      if (!(pi > 0.0)) continue;
      for (int k = 0; k < samples; ++k) {
        const int gap = g.r + 3 + rng.below(4);
        if (I.level - gap < g.k_min) continue;
        Cube J{I.level - gap, I.index};
        for (auto& m : J.index) m = (m << gap) + rng.below(1 << gap);
        if (!good_embedded(g, J, I)) {
          ++r.decay_skip;
          continue;
        }
        const double pj = poisson(g, J, sigma, out, alpha);
        const double ratio = pj * pj / (std::pow(side(J) / side(I), expo) * pi * pi);
        ++r.decay_n;
        if (ratio > r.decay) {
          r.decay = ratio;
          r.decay_w = {{"I", to_json(I)}, {"J", to_json(J)}, {"hat", to_json(hat)}};
        }
      }
    }
  }
}

void theorem_trial(const GridSpec& g, const KernelSpec& k, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                   PairResult& r) {
  const ConstantReport rep = compute_constants(g, sigma, omega, k);
  const double n = operator_norm(sigma, omega, k).value;
  const double a2 = std::sqrt(rep.A2 + rep.A2_star);
  const double pkg = a2 + rep.T + rep.T_star + rep.E + rep.E_star;
  r.have_theorem = true;
  r.N = n;
  r.T = rep.T;
  r.T_star = rep.T_star;
  r.theorem = pkg > 0.0 ? n / pkg : 0.0;
  r.necessity = n > 0.0 ? a2 / n : 0.0;
  r.energy_norm = n > 0.0 ? (rep.E + rep.E_star) / n : 0.0;
  r.theorem_w = {{"N", n}, {"A2", rep.A2}, {"A2_star", rep.A2_star}, {"T", rep.T}, {"T_star", rep.T_star},
                 {"E", rep.E}, {"E_star", rep.E_star}};
}

json pair_witness(const RunConfig& c, const KernelCase& kc, int i) {
  const auto [s, w] = golden_pair(c, kc, i);
  return {{"seed", c.seed}, {"kernel", kc.kernel}, {"pair", i}, {"sigma", to_json(s)}, {"omega", to_json(w)}};
}

SuiteRecord base_record(const std::string& name, const KernelCase& kc) {
  SuiteRecord r;
  r.name = name;
  r.kernel = kc.kernel;
  r.n = kc.n;
  r.alpha = kc.alpha;
  return r;
}

// calibrated check against the frozen table
void freeze(SuiteRecord& r, const Calibration* cal, double slack, const std::vector<double>& per_pair) {
  r.calibrated = true;
  if (!cal) return;
  r.frozen = cal->get(r.name, r.kernel);
  if (!r.frozen) {
    ++r.violations;
    r.details["error"] = "missing calibration constant";
    return;
  }
  if (!(*r.frozen > 0.0)) {
    ++r.violations;
    r.details["error"] = "calibration constant is not positive";
    return;
  }
  r.limit = slack * *r.frozen;
  json bad = json::array();
  for (std::size_t i = 0; i < per_pair.size(); ++i) {
    if (per_pair[i] > *r.limit) {
      ++r.violations;
      if (bad.size() < 5) bad.push_back(i);
    }
  }
  if (!bad.empty()) r.details["violating_pairs"] = bad;
}

// bucket maxima must not increase with the dilation
bool separation_check(SuiteRecord& r, const std::vector<double>& buckets, double tol) {
  r.details["separation_max"] = buckets;
  bool ok = true;
  for (std::size_t s = 1; s < buckets.size(); ++s) {
    if (buckets[s] > buckets[s - 1] * (1.0 + tol)) ok = false;
  }
  r.details["separation_monotone"] = ok;
  if (!ok) ++r.violations;
  return ok;
}

SuiteRecord peculiar_suite(const RunConfig& c) {
  KernelCase kc;
  SuiteRecord rec = base_record("peculiar", kc);
  const GridSpec g = c.grid_for(1);
  const int trials = c.peculiar_trials;
  std::vector<PeculiarTrial> res(trials);
  std::vector<int> skips(trials, 0);
  std::vector<json> wit(trials);
  const double lattice = std::ldexp(1.0, g.k_min);
  parallel_for(trials, [&](int t) {
    Rng rng = Rng::stream(c.seed, {fnv1a("peculiar"), static_cast<std::uint64_t>(t)});
    for (;;) {
      const int level = -8 + rng.below(7);
      const std::int64_t count = std::int64_t{1} << -level;
      const Cube j{level, {rng.below(static_cast<int>(count))}};
      const double lo = lower_corner(g, j)[0];
      const int slots = static_cast<int>(side(j) / lattice);
      const int atoms = 2 + rng.below(7);
      std::set<int> used;
      AtomicMeasure omega(1);
      while (static_cast<int>(used.size()) < std::min(atoms, slots)) {
        const int s = rng.below(slots);
        if (!used.insert(s).second) continue;
        omega.add(Eigen::VectorXd::Constant(1, lo + s * lattice), rng.log_uniform(1e-2, 1e2));
      }
      double y = 0.0;
      do {
        y = rng.below(static_cast<int>(1.0 / lattice)) * lattice;
      } while (y >= lo && y <= lo + side(j));
      const PeculiarTrial p = peculiar_terms(g, omega, j, y);
      if (p.degenerate) {
        ++skips[t];
        continue;
      }
      res[t] = p;
      wit[t] = {{"trial", t}, {"J", to_json(j)}, {"y", y}, {"omega", to_json(omega)}};
      break;
    }
  });
  json bad = json::array();
  for (int t = 0; t < trials; ++t) {
    rec.skipped += skips[t];
    ++rec.instances;
    const double ratio = res[t].rhs > 0.0 ? res[t].lhs / res[t].rhs : (res[t].lhs > 0.0 ? INFINITY : 0.0);
    if (ratio > rec.max_ratio || t == 0) {
      rec.max_ratio = std::max(rec.max_ratio, ratio);
      rec.witness = wit[t];
    }
    if (res[t].lhs > res[t].rhs * (1.0 + c.rel_tol)) {
      ++rec.violations;
      if (bad.size() < 5) bad.push_back(wit[t]);
    }
  }
  rec.limit = 1.0;
  if (!bad.empty()) rec.details["violations"] = bad;
  return rec;
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::vector<std::uint32_t> v{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  for (auto t : tags) {
    v.push_back(static_cast<std::uint32_t>(t));
    v.push_back(static_cast<std::uint32_t>(t >> 32));
  }
  std::seed_seq s(v.begin(), v.end());
  return Rng(s);
}

double Rng::uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

int Rng::below(int n) { return std::min(n - 1, static_cast<int>(uniform() * n)); }

double Rng::log_uniform(double lo, double hi) {
  return std::exp(std::log(lo) + uniform() * (std::log(hi) - std::log(lo)));
}

std::vector<KernelCase> default_kernel_cases() {
  return {{"hilbert", 1, 0.0}, {"riesz_vector", 2, 0.0}, {"cauchy", 2, 1.0}};
}

GridSpec RunConfig::grid_for(int n) const {
  GridSpec g = grid;
  g.n = n;
  if (grid.shift.size() != n) g.shift = Eigen::VectorXd::Zero(n);
  g.validate();
  return g;
}

json RunConfig::to_json() const {
  json ks = json::array();
  for (const auto& k : kernels) ks.push_back({{"kernel", k.kernel}, {"n", k.n}, {"alpha", k.alpha}});
  return {{"seed", seed},
          {"sigma_atoms", sigma_atoms},
          {"omega_atoms", omega_atoms},
          {"grid", twl::to_json(grid)},
          {"kernels", ks},
          {"suites", suites},
          {"pairs", pairs},
          {"peculiar_trials", peculiar_trials},
          {"slack", slack},
          {"rel_tol", rel_tol},
          {"calibration", calibration},
          {"out", out}};
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  c.seed = j.value("seed", c.seed);
  c.sigma_atoms = j.value("sigma_atoms", c.sigma_atoms);
  c.omega_atoms = j.value("omega_atoms", c.omega_atoms);
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
  if (j.contains("kernels")) {
    c.kernels.clear();
    for (const auto& k : j.at("kernels")) c.kernels.push_back({k.at("kernel"), k.value("n", 1), k.value("alpha", 0.0)});
  }
  if (j.contains("suites")) c.suites = j.at("suites").get<std::vector<std::string>>();
  c.pairs = j.value("pairs", c.pairs);
  c.peculiar_trials = j.value("peculiar_trials", c.peculiar_trials);
  c.slack = j.value("slack", c.slack);
  c.rel_tol = j.value("rel_tol", c.rel_tol);
  c.calibration = j.value("calibration", c.calibration);
  c.out = j.value("out", c.out);
  for (const auto& k : c.kernels) k.spec().validate();
  for (const auto& s : c.suites) {
    const auto all = all_suites();
    if (std::find(all.begin(), all.end(), s) == all.end()) throw std::invalid_argument("unknown suite " + s);
  }
  return c;
}

std::vector<std::string> all_suites() {
  return {"peculiar", "monotonicity", "energy_lemma", "poisson_decay", "theorem", "necessity", "energy_vs_norm"};
}

std::vector<std::string> calibrated_suites() {
  return {"monotonicity", "energy_lemma", "poisson_decay", "theorem", "necessity"};
}

std::pair<AtomicMeasure, AtomicMeasure> generate(const GridSpec& g, int sigma_atoms, int omega_atoms, Rng& rng) {
  if (sigma_atoms < 0 || omega_atoms < 0) throw std::invalid_argument("atom counts must be nonnegative");
  const double lattice = std::ldexp(1.0, g.k_min);
  const std::int64_t slots = std::int64_t{1} << -g.k_min;
  std::set<std::vector<std::int64_t>> used;
  auto draw = [&](int count) {
    AtomicMeasure mu(g.n);
    while (mu.size() < count) {
      std::vector<std::int64_t> key(g.n);
      for (auto& v : key) v = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(slots));
      if (!used.insert(key).second) continue;  // collision: resample
      Eigen::VectorXd x(g.n);
      for (int i = 0; i < g.n; ++i) x[i] = static_cast<double>(key[i]) * lattice;
      mu.add(x, rng.log_uniform(1e-2, 1e2));
    }
    return mu;
  };
  AtomicMeasure sigma = draw(sigma_atoms);
  AtomicMeasure omega = draw(omega_atoms);
  return {std::move(sigma), std::move(omega)};
}

std::pair<AtomicMeasure, AtomicMeasure> generate_clustered(const GridSpec& g, int sigma_atoms, int omega_atoms,
                                                           Rng& rng, int clusters) {
  if (clusters < 1) throw std::invalid_argument("need at least one cluster");
  const double lattice = std::ldexp(1.0, g.k_min);
  std::vector<Cube> cubes;
  for (int c = 0; c < clusters; ++c) {
    Cube q;
    for (int attempt = 0;; ++attempt) {
      const int level = -9 + rng.below(4);
      q = Cube{level, std::vector<std::int64_t>(g.n)};
      for (auto& m : q.index) m = rng.below(1 << -level);
      if (is_good(g, q) || attempt > 10000) break;
    }
    cubes.push_back(q);
  }
  std::set<std::vector<std::int64_t>> used;
  auto place = [&](AtomicMeasure& mu, const Cube* q) {
    for (int tries = 0;; ++tries) {
      if (tries == 64) q = nullptr;  // cluster full, spill into the unit cube
      std::vector<std::int64_t> key(g.n);
      const double span = q ? side(*q) : 1.0;
      const Point lo = q ? lower_corner(g, *q) : Point::Zero(g.n);
      const auto slots = static_cast<std::int64_t>(span / lattice);
      for (int i = 0; i < g.n; ++i) key[i] = static_cast<std::int64_t>(lo[i] / lattice) + rng.below(static_cast<int>(slots));
      if (!used.insert(key).second) continue;
      Eigen::VectorXd x(g.n);
      for (int i = 0; i < g.n; ++i) x[i] = static_cast<double>(key[i]) * lattice;
      mu.add(x, rng.log_uniform(1e-2, 1e2));
      return;
    }
  };
  AtomicMeasure sigma(g.n), omega(g.n);
  for (int i = 0; i < omega_atoms; ++i) place(omega, rng.coin(0.75) ? &cubes[rng.below(clusters)] : nullptr);
  for (int i = 0; i < sigma_atoms; ++i) place(sigma, rng.coin(0.4) ? &cubes[rng.below(clusters)] : nullptr);
  return {std::move(sigma), std::move(omega)};
}

std::pair<AtomicMeasure, AtomicMeasure> golden_pair(const RunConfig& c, const KernelCase& k, int i) {
  Rng rng = Rng::stream(c.seed, {fnv1a(k.kernel), static_cast<std::uint64_t>(k.n), static_cast<std::uint64_t>(i)});
  return generate(c.grid_for(k.n), c.sigma_atoms, c.omega_atoms, rng);
}

PairCollection random_admissible_pairs(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                                       Rng& rng, double density) {
  const CubeTree t(g, sigma, omega);
  PairCollection p;
  p.root = t.root().cube;
  for (const auto& nd : t.nodes()) {
    if (nd.omega_atoms.empty() || !rng.coin(density)) continue;
    const Cube& j = nd.cube;
    std::vector<std::vector<Cube>> runs;
    bool open = false;
    for (int lev = j.level + 1; lev <= p.root.level; ++lev) {
      const Cube i = ancestor(j, lev);
      if (good_embedded(g, j, i)) {
        if (!open) runs.emplace_back();
        runs.back().push_back(i);
        open = true;
      } else {
        open = false;
      }
    }
    if (runs.empty()) continue;
    const auto& run = runs[rng.below(static_cast<int>(runs.size()))];
    const int m = static_cast<int>(run.size());
    int a = rng.below(m), b = rng.below(m);
    if (a > b) std::swap(a, b);
    for (int k = a; k <= b; ++k) p.pairs.push_back({run[k], j});
  }
  p.normalize();
  return p;
}

int thread_count() {
  if (const char* env = std::getenv("TWL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int count, const std::function<void(int)>& f) {
  const int workers = std::min(thread_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

PeculiarTrial peculiar_terms(const GridSpec& g, const AtomicMeasure& omega, const Cube& j, double y) {
  if (g.n != 1) throw std::invalid_argument("the peculiar estimate is one-dimensional");
  PeculiarTrial r;
  const auto masses = child_masses(g, omega, j);
  if (!(masses[0] > 0.0 && masses[1] > 0.0)) {
    r.degenerate = true;
    return r;
  }
  const Eigen::VectorXd h = evaluate(g, haar_system(g, omega, j).front(), omega);
  const double c = center(g, j)[0];
  const double d = y - c;
  r.eta = std::abs(d) / (0.5 * side(j));
  if (!(r.eta > 1.0)) throw std::invalid_argument("y must satisfy eta > 1");
  const KernelSpec k = KernelSpec::hilbert();
  Eigen::VectorXd yv = Eigen::VectorXd::Constant(1, y);
  double xh = 0.0, ky = 0.0;
  for (int i = 0; i < omega.size(); ++i) {
    if (h[i] == 0.0) continue;
    xh += omega.weights[i] * h[i] * (omega.points(0, i) - c);
    // kernel_eval(k, y, x) = 1/(x - y)
    ky += omega.weights[i] * h[i] * kernel_eval(k, yv, omega.point(i)).value[0];
  }
  r.lhs = std::abs(ky + xh / (d * d));
  r.rhs = xh / ((r.eta - 1.0) * d * d);
  return r;
}

bool Report::ok() const {
  return std::all_of(suites.begin(), suites.end(), [](const SuiteRecord& s) { return s.violations == 0; });
}

json Report::to_json() const {
  json out = {{"config", config}, {"ok", ok()}};
  json arr = json::array();
  for (const auto& s : suites) {
    json r = {{"name", s.name},         {"kernel", s.kernel},       {"n", s.n},
              {"alpha", s.alpha},       {"instances", s.instances}, {"skipped", s.skipped},
              {"max_ratio", s.max_ratio}, {"calibrated", s.calibrated}};
    r["frozen"] = s.frozen ? json(*s.frozen) : json(nullptr);
    r["limit"] = s.limit ? json(*s.limit) : json(nullptr);
    r["violations"] = s.violations;
    r["details"] = s.details;
    r["witness"] = s.witness;
    arr.push_back(std::move(r));
  }
  out["suites"] = std::move(arr);
  return out;
}

std::string Report::csv() const {
  std::ostringstream os;
  os << "suite,kernel,n,alpha,instances,max_ratio,frozen,limit,violations\n";
  for (const auto& s : suites) {
    os << s.name << ',' << s.kernel << ',' << s.n << ',' << fmt(s.alpha) << ',' << s.instances << ','
       << fmt(s.max_ratio) << ',' << (s.frozen ? fmt(*s.frozen) : "") << ',' << (s.limit ? fmt(*s.limit) : "") << ','
       << s.violations << '\n';
  }
  return os.str();
}

std::optional<double> Calibration::get(const std::string& suite, const std::string& kernel) const {
  auto it = constants.find(suite);
  if (it == constants.end()) return std::nullopt;
  auto jt = it->second.find(kernel);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

json Calibration::to_json() const {
  json c = json::object();
  for (const auto& [s, m] : constants) {
    for (const auto& [k, v] : m) c[s][k] = v;
  }
  return {{"version", 1}, {"provenance", provenance}, {"constants", c}};
}

Calibration Calibration::from_json(const json& j) {
  Calibration c;
  c.provenance = j.value("provenance", json::object());
  for (const auto& [s, m] : j.at("constants").items()) {
    for (const auto& [k, v] : m.items()) c.constants[s][k] = v.get<double>();
  }
  return c;
}

Report run_suites(const RunConfig& c, const Calibration* cal) {
  Report rep;
  rep.config = c.to_json();
  if (selected(c, "peculiar")) rep.suites.push_back(peculiar_suite(c));

  const bool mono = selected(c, "monotonicity"), energy = selected(c, "energy_lemma"),
             decay = selected(c, "poisson_decay"), thm = selected(c, "theorem"), nec = selected(c, "necessity"),
             evn = selected(c, "energy_vs_norm");
  if (!(mono || energy || decay || thm || nec || evn)) return rep;

  for (const auto& kc : c.kernels) {
    const KernelSpec k = kc.spec();
    const GridSpec g = c.grid_for(kc.n);
    std::vector<PairResult> res(c.pairs);
    parallel_for(c.pairs, [&](int i) {
      const auto [sigma, omega] = golden_pair(c, kc, i);
      PairResult& r = res[i];
      if (mono) monotonicity_trials(g, k, sigma, omega, r);
      if (energy) {
        Rng rng = Rng::stream(c.seed, {fnv1a("energy_lemma"), fnv1a(kc.kernel), static_cast<std::uint64_t>(i)});
        energy_trials(g, k, sigma, omega, rng, r);
      }
      if (decay) {
        Rng rng = Rng::stream(c.seed, {fnv1a("poisson_decay"), fnv1a(kc.kernel), static_cast<std::uint64_t>(i)});
        decay_trials(g, kc.alpha, sigma, omega, rng, r);
      }
      if (thm || nec || evn) theorem_trial(g, k, sigma, omega, r);
    });

    // per-pair maxima, the witness is the first pair attaining the max
    auto collect = [&](SuiteRecord& rec, auto ratio, const std::function<json(const PairResult&)>& detail) {
      std::vector<double> per(c.pairs);
      int arg = -1;
      for (int i = 0; i < c.pairs; ++i) {
        per[i] = ratio(res[i]);
        if (arg < 0 || per[i] > per[arg]) arg = i;
      }
      rec.max_ratio = arg >= 0 ? per[arg] : 0.0;
      if (arg >= 0) {
        rec.witness = pair_witness(c, kc, arg);
        rec.witness["detail"] = detail(res[arg]);
      }
      return per;
    };

    if (mono) {
      SuiteRecord rec = base_record("monotonicity", kc);
      std::vector<double> buckets(separations, 0.0);
      for (const auto& r : res) {
        rec.instances += r.mono_n;
        rec.skipped += r.mono_skip;
        for (int s = 0; s < separations; ++s) buckets[s] = std::max(buckets[s], r.mono[s]);
      }
      const auto per = collect(
          rec, [](const PairResult& r) { return r.mono_best; },
          [](const PairResult& r) { return r.mono_w; });
      freeze(rec, cal, c.slack, per);
      separation_check(rec, buckets, c.rel_tol);
      rep.suites.push_back(std::move(rec));
    }
    if (energy) {
      SuiteRecord rec = base_record("energy_lemma", kc);
      std::vector<double> buckets(separations, 0.0);
      for (const auto& r : res) {
        rec.instances += r.energy_n;
        rec.skipped += r.energy_skip;
        for (int s = 0; s < separations; ++s) buckets[s] = std::max(buckets[s], r.energy[s]);
      }
      const auto per = collect(
          rec, [](const PairResult& r) { return r.energy_best; },
          [](const PairResult& r) { return r.energy_w; });
      freeze(rec, cal, c.slack, per);
      separation_check(rec, buckets, c.rel_tol);
      rep.suites.push_back(std::move(rec));
    }
    if (decay) {
      SuiteRecord rec = base_record("poisson_decay", kc);
      for (const auto& r : res) {
        rec.instances += r.decay_n;
        rec.skipped += r.decay_skip;
      }
      const auto per = collect(rec, [](const PairResult& r) { return r.decay; },
                               [](const PairResult& r) { return r.decay_w; });
      freeze(rec, cal, c.slack, per);
      rep.suites.push_back(std::move(rec));
    }
    if (thm) {
      SuiteRecord rec = base_record("theorem", kc);
      rec.instances = c.pairs;
      const auto per = collect(rec, [](const PairResult& r) { return r.theorem; },
                               [](const PairResult& r) { return r.theorem_w; });
      freeze(rec, cal, c.slack, per);
      int order = 0;
      for (const auto& r : res) {
        if (r.T > r.N * (1.0 + c.rel_tol) || r.T_star > r.N * (1.0 + c.rel_tol)) ++order;
      }
      rec.details["testing_above_norm"] = order;
      rec.violations += order;
      rep.suites.push_back(std::move(rec));
    }
    if (nec) {
      SuiteRecord rec = base_record("necessity", kc);
      rec.instances = c.pairs;
      const auto per = collect(rec, [](const PairResult& r) { return r.necessity; },
                               [](const PairResult& r) { return r.theorem_w; });
      freeze(rec, cal, c.slack, per);
      rep.suites.push_back(std::move(rec));
    }
    if (evn) {
      // exploratory, never asserted
      SuiteRecord rec = base_record("energy_vs_norm", kc);
      rec.instances = c.pairs;
      const auto per = collect(rec, [](const PairResult& r) { return r.energy_norm; },
                               [](const PairResult& r) { return r.theorem_w; });
      double lo = per.empty() ? 0.0 : *std::min_element(per.begin(), per.end());
      rec.details["min_ratio"] = lo;
      rep.suites.push_back(std::move(rec));
    }
  }
  return rep;
}

Calibration calibrate(const RunConfig& c) {
  RunConfig cc = c;
  cc.suites = calibrated_suites();
  const Report r = run_suites(cc, nullptr);
  Calibration cal;
  cal.provenance = {{"command", "twl calibrate"},
                    {"seed", c.seed},
                    {"pairs", c.pairs},
                    {"sigma_atoms", c.sigma_atoms},
                    {"omega_atoms", c.omega_atoms},
                    {"grid", to_json(c.grid)}};
  for (const auto& s : r.suites) cal.constants[s.name][s.kernel] = s.max_ratio;
  return cal;
}

void write_report(const Report& r, const std::string& out) {
  write_text(out + ".json", r.to_json().dump(2) + "\n");
  write_text(out + ".csv", r.csv());
}

}  // namespace twl
