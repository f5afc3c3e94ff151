#include "twl/lab.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace twl;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> n;
  std::optional<double> alpha;
  std::string kernel;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON run configuration");
  app->add_option("--seed", c.seed, "64-bit seed");
  app->add_option("--n", c.n, "dimension");
  app->add_option("--alpha", c.alpha, "fractional order");
  app->add_option("--kernel", c.kernel, "hilbert, riesz_vector, cauchy or riesz:<j>");
  app->add_option("--out", c.out, "output path");
}

RunConfig make_config(const Common& c) {
  RunConfig r = c.config.empty() ? RunConfig{} : RunConfig::from_json(read_json(c.config));
  if (c.seed) r.seed = *c.seed;
  if (!c.kernel.empty() || c.n || c.alpha) {
    KernelCase k;
    k.kernel = c.kernel.empty() ? (c.n.value_or(1) == 1 ? "hilbert" : "riesz_vector") : c.kernel;
    k.n = c.n.value_or(k.kernel == "cauchy" ? 2 : 1);
    k.alpha = c.alpha.value_or(k.kernel == "cauchy" ? 1.0 : 0.0);
    k.spec().validate();
    r.kernels = {k};
  }
  if (!c.out.empty()) r.out = c.out;
  return r;
}

KernelCase single_case(const RunConfig& r) { return r.kernels.front(); }

void emit(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_text(out, j.dump(2) + "\n");
  }
}

AtomicMeasure load_measure(const std::string& path) { return measure_from_json(read_json(path)); }

int run_report(const RunConfig& cfg, bool quiet) {
  std::unique_ptr<Calibration> cal;
  try {
    cal = std::make_unique<Calibration>(Calibration::from_json(read_json(cfg.calibration)));
  } catch (const std::exception& e) {
    std::cerr << "calibration table unavailable (" << e.what() << "); calibrated suites will fail\n";
    cal = std::make_unique<Calibration>();
  }
  const Report r = run_suites(cfg, cal.get());
  write_report(r, cfg.out);
  if (!quiet) {
    for (const auto& s : r.suites) {
      std::cout << (s.violations == 0 ? "PASS " : "FAIL ") << s.name << " " << s.kernel << " max_ratio=" << s.max_ratio;
      if (s.limit) std::cout << " limit=" << *s.limit;
      std::cout << " violations=" << s.violations << "\n";
    }
  }
  return r.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-weight lab"};
  app.require_subcommand(1);

  Common gen_c;
  int sigma_atoms = -1, omega_atoms = -1;
  auto* gen = app.add_subcommand("gen", "generate a random measure pair");
  add_common(gen, gen_c);
  gen->add_option("--sigma-atoms", sigma_atoms);
  gen->add_option("--omega-atoms", omega_atoms);

  Common con_c;
  std::string sigma_path, omega_path;
  int depth = -1;
  auto* con = app.add_subcommand("constants", "two-weight constants of a measure pair");
  add_common(con, con_c);
  con->add_option("--sigma", sigma_path)->required();
  con->add_option("--omega", omega_path)->required();
  con->add_option("--depth", depth, "energy subpartition depth, -1 for unbounded");

  Common dec_c;
  std::string f_path;
  double cz_c = 4.0;
  auto* dec = app.add_subcommand("decompose", "Haar expansion, stopping data and double corona");
  add_common(dec, dec_c);
  dec->add_option("--sigma", sigma_path)->required();
  dec->add_option("--omega", omega_path)->required();
  dec->add_option("--f", f_path, "JSON array of values of f on the sigma atoms");
  dec->add_option("--C", cz_c, "stopping ratio");

  Common sl_c;
  double eps = 0.5;
  std::string pairs_path;
  auto* sl = app.add_subcommand("size-lemma", "Size Lemma decomposition of an admissible collection");
  add_common(sl, sl_c);
  sl->add_option("--sigma", sigma_path)->required();
  sl->add_option("--omega", omega_path)->required();
  sl->add_option("--eps", eps);
  sl->add_option("--pairs", pairs_path, "pair collection JSON; random admissible pairs when absent");

  Common ver_c;
  std::vector<std::string> suites;
  std::string cal_path;
  auto* ver = app.add_subcommand("verify", "run verification suites");
  add_common(ver, ver_c);
  ver->add_option("--suite", suites, "suite name (repeatable)");
  ver->add_option("--calibration", cal_path);

  Common rep_c;
  auto* rep = app.add_subcommand("report", "run the configured suites and write the report");
  add_common(rep, rep_c);
  rep->add_option("--calibration", cal_path);

  Common cal_c;
  auto* calc = app.add_subcommand("calibrate", "recompute the calibration table");
  add_common(calc, cal_c);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      RunConfig cfg = make_config(gen_c);
      if (sigma_atoms >= 0) cfg.sigma_atoms = sigma_atoms;
      if (omega_atoms >= 0) cfg.omega_atoms = omega_atoms;
      const KernelCase kc = single_case(cfg);
      Rng rng = Rng::stream(cfg.seed, {});
      const auto [s, w] = generate(cfg.grid_for(kc.n), cfg.sigma_atoms, cfg.omega_atoms, rng);
      const std::string dir = gen_c.out.empty() ? "." : gen_c.out;
      write_text(dir + "/sigma.json", to_json(s).dump(2) + "\n");
      write_text(dir + "/omega.json", to_json(w).dump(2) + "\n");
      return 0;
    }
    if (*con) {
      const AtomicMeasure s = load_measure(sigma_path), w = load_measure(omega_path);
      RunConfig cfg = make_config(con_c);
      KernelCase kc = single_case(cfg);
      if (con_c.kernel.empty() && !con_c.n) kc = s.n == 1 ? KernelCase{} : KernelCase{"riesz_vector", s.n, 0.0};
      const KernelSpec k = kc.spec();
      const GridSpec g = cfg.grid_for(s.n);
      const ConstantReport r = compute_constants(g, s, w, k, depth);
      const NormResult nr = operator_norm(s, w, k);
      json out = {{"N", nr.value},
                  {"T", r.T},
                  {"Tstar", r.T_star},
                  {"kernel", k.name()},
                  {"truncation", k.truncation},
                  {"enumerated_cubes", r.enumerated},
                  {"A2", r.A2},
                  {"A2_star", r.A2_star},
                  {"A2_tailless", r.A2_tailless},
                  {"E", r.E},
                  {"E_star", r.E_star},
                  {"energy_depth", depth},
                  {"witnesses",
                   {{"A2", to_json(r.w_A2.cube)},
                    {"A2_star", to_json(r.w_A2_star.cube)},
                    {"T", to_json(r.w_T.witness)},
                    {"T_star", to_json(r.w_T_star.witness)},
                    {"E", to_json(r.w_E.top)},
                    {"E_star", to_json(r.w_E_star.top)}}}};
      emit(out, con_c.out);
      return 0;
    }
    if (*dec) {
      const AtomicMeasure s = load_measure(sigma_path), w = load_measure(omega_path);
      RunConfig cfg = make_config(dec_c);
      const GridSpec g = cfg.grid_for(s.n);
      Eigen::VectorXd f(s.size());
      if (!f_path.empty()) {
        const auto v = read_json(f_path).get<std::vector<double>>();
        if (static_cast<int>(v.size()) != s.size()) throw std::invalid_argument("f has the wrong length");
        for (int i = 0; i < s.size(); ++i) f[i] = v[i];
      } else {
        Rng rng = Rng::stream(cfg.seed, {});
        for (int i = 0; i < s.size(); ++i) f[i] = rng.uniform(-1.0, 1.0);
      }
      const double alpha = dec_c.alpha.value_or(0.0);
      const HaarExpansion e = analyze(g, s, f);
      const CzStopping cz = cz_stopping_times(g, s, f, cz_c);
      const DoubleCorona dc = double_corona(g, s, w, f, alpha, cz_c);
      json out = {{"haar", {{"root", to_json(e.root)}, {"mean", e.mean}, {"coefficients", to_json(e.coefficients, g.n)}}},
                  {"cz", stopping_tree_json(g, s, f, cz.data)},
                  {"cz_constants", {{"C", cz.ratio}, {"carleson", cz.carleson}, {"quasi", cz.quasi}}},
                  {"double_corona", stopping_tree_json(g, s, f, dc.result)},
                  {"energy_constant", dc.energy_constant},
                  {"C1", dc.C1}};
      emit(out, dec_c.out);
      return 0;
    }
    if (*sl) {
      const AtomicMeasure s = load_measure(sigma_path), w = load_measure(omega_path);
      RunConfig cfg = make_config(sl_c);
      KernelCase kc = single_case(cfg);
      if (sl_c.kernel.empty() && !sl_c.n) kc = s.n == 1 ? KernelCase{} : KernelCase{"riesz_vector", s.n, 0.0};
      const KernelSpec k = kc.spec();
      const GridSpec g = cfg.grid_for(s.n);
      PairCollection p;
      if (!pairs_path.empty()) {
        p = pairs_from_json(read_json(pairs_path));
      } else {
        Rng rng = Rng::stream(cfg.seed, {});
        p = random_admissible_pairs(g, s, w, rng);
      }
      const SizeDecomposition d = size_lemma_decompose(g, s, w, p, kc.alpha, eps);
      json sizes = json::array(), norms = json::array();
      bool contraction = true;
      for (const auto& piece : d.small) {
        const double v = size_functional(g, s, w, piece, kc.alpha).value;
        sizes.push_back(v);
        if (v > eps * d.size) contraction = false;
        norms.push_back(stopping_form_norm(g, s, w, piece, k).value);
      }
      json out = {{"eps", eps},
                  {"size_before", d.size},
                  {"sizes_small", sizes},
                  {"partition_ok", is_partition(p, d)},
                  {"contraction_ok", contraction},
                  {"norms",
                   {{"P", stopping_form_norm(g, s, w, p, k).value},
                    {"big", stopping_form_norm(g, s, w, d.big, k).value},
                    {"small", norms},
                    {"except", stopping_form_norm(g, s, w, d.except, k).value}}},
                  {"pieces", {{"pairs", p.size()}, {"big", d.big.size()}, {"small", d.small.size()}, {"except", d.except.size()}}},
                  {"generations", d.generations.size()}};
      emit(out, sl_c.out);
      return contraction ? 0 : 1;
    }
    if (*ver || *rep) {
      RunConfig cfg = make_config(*ver ? ver_c : rep_c);
      if (*ver && !suites.empty()) cfg.suites = suites;
      if (!cal_path.empty()) cfg.calibration = cal_path;
      return run_report(cfg, false);
    }
    if (*calc) {
      RunConfig cfg = make_config(cal_c);
      const Calibration cal = calibrate(cfg);
      emit(cal.to_json(), cal_c.out.empty() ? cfg.calibration : cal_c.out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
