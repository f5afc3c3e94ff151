#include "twl/io.hpp"

#include <fstream>
#include <sstream>

namespace twl {

json to_json(const GridSpec& g) {
  return {{"n", g.n},
          {"shift", std::vector<double>(g.shift.data(), g.shift.data() + g.n)},
          {"levels", {g.k_min, g.k_max}},
          {"r", g.r},
          {"eps", g.eps}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g = GridSpec::standard(j.value("n", 1));
  if (j.contains("shift")) {
    const auto s = j.at("shift").get<std::vector<double>>();
    g.shift = Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
  }
  if (j.contains("levels")) {
    g.k_min = j.at("levels").at(0).get<int>();
    g.k_max = j.at("levels").at(1).get<int>();
  }
  g.r = j.value("r", g.r);
  g.eps = j.value("eps", g.eps);
  g.validate();
  return g;
}

json to_json(const Cube& q) { return {{"level", q.level}, {"index", q.index}}; }

Cube cube_from_json(const json& j) {
  return {j.at("level").get<int>(), j.at("index").get<std::vector<std::int64_t>>()};
}

json to_json(const AtomicMeasure& mu) {
  json atoms = json::array();
  for (int i = 0; i < mu.size(); ++i) {
    const auto x = mu.point(i);
    atoms.push_back({{"x", std::vector<double>(x.data(), x.data() + mu.n)}, {"w", mu.weights[i]}});
  }
  return {{"n", mu.n}, {"atoms", atoms}};
}

AtomicMeasure measure_from_json(const json& j) {
  AtomicMeasure mu(j.at("n").get<int>());
  for (const auto& a : j.at("atoms")) {
    const auto x = a.at("x").get<std::vector<double>>();
    mu.add(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())), a.at("w").get<double>());
  }
  mu.validate();
  return mu;
}

json to_json(const CoefficientMap& c, int n) {
  json out = json::array();
  for (const auto& [key, v] : c) {
    std::vector<int> bits(n);
    for (int i = 0; i < n; ++i) bits[i] = (key.label >> i) & 1u;
    out.push_back({{"level", key.cube.level}, {"index", key.cube.index}, {"a", bits}, {"coef", v}});
  }
  return out;
}

json to_json(const PairCollection& p) {
  json pairs = json::array();
  for (const auto& pr : p.pairs) pairs.push_back({{"I", to_json(pr.I)}, {"J", to_json(pr.J)}});
  return {{"root", to_json(p.root)}, {"pairs", pairs}};
}

PairCollection pairs_from_json(const json& j) {
  PairCollection p;
  p.root = cube_from_json(j.at("root"));
  for (const auto& pr : j.at("pairs")) p.pairs.push_back({cube_from_json(pr.at("I")), cube_from_json(pr.at("J"))});
  p.normalize();
  return p;
}

json stopping_tree_json(const GridSpec& g, const AtomicMeasure& sigma, const Eigen::VectorXd& f,
                        const StoppingData& s) {
  const AtomicMeasure empty(g.n);
  const CubeTree tree(g, sigma, empty, s.root());
  std::function<json(int)> node = [&](int i) {
    const auto corona = corona_cubes(tree, s, i);
    const auto atoms = atoms_in(g, sigma, s.cubes[i]);
    const double m = mass(sigma, atoms);
    double kids = 0.0;
    for (int k : s.kids(i)) kids += mass(g, sigma, s.cubes[k]);
    bool avg_ok = true;
    for (const auto& q : corona) {
      const auto qa = atoms_in(g, sigma, q);
      if (mass(sigma, qa) > 0.0 && average_abs(sigma, f, qa) > s.alpha[i]) avg_ok = false;
    }
    json children = json::array();
    for (int k : s.kids(i)) children.push_back(node(k));
    return json{{"cube", to_json(s.cubes[i])},
                {"alpha", s.alpha[i]},
                {"corona_size", corona.size()},
                {"checks", {{"carleson", m > 0.0 ? kids / m : 0.0}, {"avg_bound", avg_ok}}},
                {"children", children}};
  };
  return node(0);
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(p.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace twl
