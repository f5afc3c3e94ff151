#include "twl/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace twl {

namespace {

std::int64_t floor_div_pow2(std::int64_t m, int shift) { return m >> shift; }

// distance from the closed interval [lo, hi] to the lattice offset + step Z
double interval_lattice_distance(double lo, double hi, double offset, double step) {
  const double t = std::floor(exact_sub(lo, offset) / step);
  const double below = offset + t * step;
  const double above = below + step;
  if (below == lo || above <= hi) return 0.0;
  return std::min(lo - below, above - hi);
}

double interval_gap(double alo, double ahi, double blo, double bhi) {
  return std::max({0.0, blo - ahi, alo - bhi});
}

}  // namespace

GridSpec GridSpec::standard(int n) {
  GridSpec g;
  g.n = n;
  g.shift = Eigen::VectorXd::Zero(n);
  return g;
}

void GridSpec::validate() const {
  if (n < 1) throw GridError("grid dimension must be positive");
  if (shift.size() != n) throw GridError("grid shift has wrong dimension");
  if (k_min > k_max) throw GridError("empty level window");
  if (r < 1) throw GridError("goodness parameter r must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw GridError("goodness parameter eps must lie in (0,1)");
  for (int i = 0; i < n; ++i) {
    if (!(shift[i] >= 0.0 && shift[i] < 1.0)) throw GridError("grid shift must lie in [0,1)");
  }
}

std::size_t CubeHash::operator()(const Cube& q) const noexcept {
  std::size_t h = std::hash<int>{}(q.level);
  for (auto m : q.index) h ^= std::hash<std::int64_t>{}(m) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::string to_string(const Cube& q) {
  std::ostringstream os;
  os << "k=" << q.level << " m=(";
  for (std::size_t i = 0; i < q.index.size(); ++i) os << (i ? "," : "") << q.index[i];
  os << ")";
  return os.str();
}

double exact_sub(double a, double b) {
  const double s = a - b;
  const double bb = a - s;
  const double err = (a - (s + bb)) + (bb - b);
  if (err != 0.0 || !std::isfinite(s)) throw GridError("coordinate difference is not exactly representable");
  return s;
}

Point lower_corner(const GridSpec& g, const Cube& q) {
  Point p(q.dim());
  for (int i = 0; i < q.dim(); ++i) p[i] = g.shift[i] + std::ldexp(static_cast<double>(q.index[i]), q.level);
  return p;
}

Point center(const GridSpec& g, const Cube& q) {
  return lower_corner(g, q).array() + 0.5 * side(q);
}

Cube cube_containing(const GridSpec& g, const Eigen::Ref<const Point>& x, int level) {
  if (x.size() != g.n) throw GridError("point has wrong dimension");
  Cube q;
  q.level = level;
  q.index.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    const double t = std::ldexp(exact_sub(x[i], g.shift[i]), -level);
    q.index[i] = static_cast<std::int64_t>(std::floor(t));
  }
  return q;
}

bool contains(const GridSpec& g, const Cube& q, const Eigen::Ref<const Point>& x) {
  return cube_containing(g, x, q.level) == q;
}

bool contains(const Cube& outer, const Cube& inner) {
  if (inner.level > outer.level) return false;
  const int d = outer.level - inner.level;
  for (int i = 0; i < outer.dim(); ++i) {
    if (floor_div_pow2(inner.index[i], d) != outer.index[i]) return false;
  }
  return true;
}

bool disjoint(const Cube& a, const Cube& b) { return !contains(a, b) && !contains(b, a); }

Cube parent(const Cube& q) { return ancestor(q, q.level + 1); }

Cube ancestor(const Cube& q, int level) {
  if (level < q.level) throw GridError("ancestor below cube level");
  Cube a;
  a.level = level;
  a.index.resize(q.index.size());
  for (std::size_t i = 0; i < q.index.size(); ++i) a.index[i] = floor_div_pow2(q.index[i], level - q.level);
  return a;
}

Cube child(const Cube& q, unsigned j) {
  Cube c;
  c.level = q.level - 1;
  c.index.resize(q.index.size());
  for (std::size_t i = 0; i < q.index.size(); ++i) c.index[i] = 2 * q.index[i] + ((j >> i) & 1u);
  return c;
}

std::vector<Cube> children(const GridSpec& g, const Cube& q) {
  if (q.level <= g.k_min) throw GridError("children requested below the level window");
  std::vector<Cube> out;
  const unsigned count = 1u << q.dim();
  out.reserve(count);
  for (unsigned j = 0; j < count; ++j) out.push_back(child(q, j));
  return out;
}

unsigned child_slot(const Cube& parent_cube, const Cube& descendant) {
  const Cube c = ancestor(descendant, parent_cube.level - 1);
  unsigned j = 0;
  for (int i = 0; i < c.dim(); ++i) j |= static_cast<unsigned>(c.index[i] & 1) << i;
  return j;
}

Skeleton skeleton(const GridSpec& g, const Cube& q) {
  Skeleton s;
  s.lower = lower_corner(g, q);
  s.length = side(q);
  s.planes.resize(q.dim(), 3);
  for (int i = 0; i < q.dim(); ++i) {
    s.planes(i, 0) = s.lower[i];
    s.planes(i, 1) = s.lower[i] + 0.5 * s.length;
    s.planes(i, 2) = s.lower[i] + s.length;
  }
  return s;
}

bool on_skeleton(const Skeleton& s, const Eigen::Ref<const Point>& x) {
  bool inside = true;
  bool on_plane = false;
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < s.lower[i] || x[i] > s.lower[i] + s.length) inside = false;
    for (int p = 0; p < 3; ++p) on_plane = on_plane || x[i] == s.planes(i, p);
  }
  return inside && on_plane;
}

double skeleton_distance(const GridSpec& g, const Cube& i, const Cube& j) {
  const Skeleton s = skeleton(g, i);
  const Point jlo = lower_corner(g, j);
  const double jl = side(j);
  double best = std::numeric_limits<double>::infinity();
  // each face piece {x in closure(I) : x_d = p} is an axis-aligned box
  for (int d = 0; d < g.n; ++d) {
    for (int p = 0; p < 3; ++p) {
      double sq = 0.0;
      for (int e = 0; e < g.n; ++e) {
        double gap;
        if (e == d) {
          gap = interval_gap(jlo[e], jlo[e] + jl, s.planes(d, p), s.planes(d, p));
        } else {
          gap = interval_gap(jlo[e], jlo[e] + jl, s.lower[e], s.lower[e] + s.length);
        }
        sq += gap * gap;
      }
      best = std::min(best, std::sqrt(sq));
    }
  }
  return best;
}

double lattice_skeleton_distance(const GridSpec& grid, const GridSpec& jgrid, const Cube& j, int level) {
  const Point jlo = lower_corner(jgrid, j);
  const double jl = side(j);
  const double step = std::ldexp(1.0, level - 1);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.n; ++i) {
    best = std::min(best, interval_lattice_distance(jlo[i], jlo[i] + jl, grid.shift[i], step));
  }
  return best;
}

bool is_good(const GridSpec& g, const Cube& j, const GridSpec& other) {
  const double lj = side(j);
  for (int level = j.level + g.r; level <= other.k_max; ++level) {
    const double li = std::ldexp(1.0, level);
    const double threshold = 0.5 * std::pow(lj, g.eps) * std::pow(li, 1.0 - g.eps);
    if (lattice_skeleton_distance(other, g, j, level) <= threshold) return false;
  }
  return true;
}

bool deeply_embedded(const GridSpec& g, const Cube& j, const Cube& i) {
  if (!contains(i, j)) return false;
  if (j.level > i.level - g.r) return false;
  const double threshold = std::pow(side(j), g.eps) * std::pow(side(i), 1.0 - g.eps);
  return skeleton_distance(g, i, j) >= threshold;
}

}  // namespace twl
