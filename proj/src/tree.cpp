#include "twl/tree.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace twl {

bool CubeTree::Node::leaf() const {
  return std::all_of(children.begin(), children.end(), [](int c) { return c < 0; });
}

Cube bounding_cube(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega) {
  std::vector<Point> pts;
  for (int i = 0; i < sigma.size(); ++i) pts.emplace_back(sigma.point(i));
  for (int i = 0; i < omega.size(); ++i) pts.emplace_back(omega.point(i));
  if (pts.empty()) throw GridError("cannot bound an empty support");
  Cube top = cube_containing(g, pts.front(), g.k_max);
  for (const auto& p : pts) {
    if (cube_containing(g, p, g.k_max) != top) throw GridError("support does not fit in one window cube");
  }
  Cube q = top;
  while (q.level > g.k_min) {
    const Cube c = cube_containing(g, pts.front(), q.level - 1);
    bool all = true;
    for (const auto& p : pts) {
      if (!contains(g, c, p)) {
        all = false;
        break;
      }
    }
    if (!all) break;
    q = c;
  }
  return q;
}

CubeTree::CubeTree(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
                   std::optional<Cube> root, int max_depth)
    : grid_(g), sigma_(&sigma), omega_(&omega) {
  grid_.validate();
  if (sigma.n != g.n || omega.n != g.n) throw GridError("measure dimension differs from grid");
  Node r;
  r.cube = root ? *root : bounding_cube(g, sigma, omega);
  for (int i = 0; i < sigma.size(); ++i) {
    if (contains(g, r.cube, sigma.point(i))) r.sigma_atoms.push_back(i);
  }
  for (int i = 0; i < omega.size(); ++i) {
    if (contains(g, r.cube, omega.point(i))) r.omega_atoms.push_back(i);
  }
  const unsigned nchild = 1u << g.n;
  nodes_.push_back(std::move(r));
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    Node& cur = nodes_[k];
    cur.sigma_mass = mass(sigma, cur.sigma_atoms);
    cur.omega_mass = mass(omega, cur.omega_atoms);
    cur.children.assign(nchild, -1);
    index_.emplace(cur.cube, static_cast<int>(k));
    if (cur.atom_count() < 2) continue;
    if (cur.cube.level <= g.k_min || (max_depth >= 0 && cur.depth >= max_depth)) {
      separating_ = false;
      continue;
    }
    std::vector<Node> kids(nchild);
    for (unsigned j = 0; j < nchild; ++j) {
      kids[j].cube = child(cur.cube, j);
      kids[j].parent = static_cast<int>(k);
      kids[j].depth = cur.depth + 1;
    }
    for (int i : cur.sigma_atoms) kids[child_slot(cur.cube, cube_containing(g, sigma.point(i), cur.cube.level - 1))].sigma_atoms.push_back(i);
    for (int i : cur.omega_atoms) kids[child_slot(cur.cube, cube_containing(g, omega.point(i), cur.cube.level - 1))].omega_atoms.push_back(i);
    for (unsigned j = 0; j < nchild; ++j) {
      if (kids[j].atom_count() == 0) continue;
      nodes_[k].children[j] = static_cast<int>(nodes_.size());
      nodes_.push_back(std::move(kids[j]));
    }
  }
}

int CubeTree::find(const Cube& q) const {
  auto it = index_.find(q);
  return it == index_.end() ? -1 : it->second;
}

int CubeTree::locate(const Cube& q) const {
  if (!contains(root().cube, q)) return -1;
  int cur = 0;
  while (nodes_[cur].cube.level > q.level) {
    const int next = nodes_[cur].children[child_slot(nodes_[cur].cube, q)];
    if (next < 0) break;
    cur = next;
  }
  return cur;
}

std::vector<int> CubeTree::subtree(int i, int max_relative_depth) const {
  std::vector<int> out{i};
  const int base = nodes_[i].depth;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Node& nd = nodes_[out[k]];
    if (max_relative_depth >= 0 && nd.depth - base >= max_relative_depth) continue;
    for (int c : nd.children) {
      if (c >= 0) out.push_back(c);
    }
  }
  return out;
}

int CubeTree::height() const {
  int h = 0;
  for (const auto& nd : nodes_) h = std::max(h, nd.depth);
  return h;
}

std::vector<Cube> window_cubes(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega) {
  std::set<Cube> cubes;
  auto add = [&](const AtomicMeasure& mu) {
    for (int i = 0; i < mu.size(); ++i) {
      for (int k = g.k_min; k <= g.k_max; ++k) cubes.insert(cube_containing(g, mu.point(i), k));
    }
  };
  add(sigma);
  add(omega);
  return {cubes.begin(), cubes.end()};
}

}  // namespace twl
