#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace twl {

using Point = Eigen::VectorXd;

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shifted dyadic grid. Cubes at level k have side 2^k and lower corner
// shift + 2^k m.
struct GridSpec {
  int n = 1;
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(1);
  int k_min = -12;
  int k_max = 2;
  int r = 7;
  double eps = 0.3;

  static GridSpec standard(int n);
  void validate() const;
  // eps(n+1-alpha) < 1
  bool admits(double alpha) const { return eps * (n + 1 - alpha) < 1.0; }
};

struct Cube {
  int level = 0;
  std::vector<std::int64_t> index;

  int dim() const { return static_cast<int>(index.size()); }
  auto operator<=>(const Cube&) const = default;
  bool operator==(const Cube&) const = default;
};

struct CubeHash {
  std::size_t operator()(const Cube& q) const noexcept;
};

std::string to_string(const Cube& q);

// exact a - b, throws GridError when the difference is not representable
double exact_sub(double a, double b);

inline double side(const Cube& q) { return std::ldexp(1.0, q.level); }
inline double volume(const Cube& q) { return std::ldexp(1.0, q.level * q.dim()); }

Point lower_corner(const GridSpec& g, const Cube& q);
Point center(const GridSpec& g, const Cube& q);

Cube cube_containing(const GridSpec& g, const Eigen::Ref<const Point>& x, int level);
bool contains(const GridSpec& g, const Cube& q, const Eigen::Ref<const Point>& x);
// inner is a (non-strict) dyadic subcube of outer
bool contains(const Cube& outer, const Cube& inner);
bool disjoint(const Cube& a, const Cube& b);

Cube parent(const Cube& q);
Cube ancestor(const Cube& q, int level);
// child slot j has bit i set when the child is the upper half in coordinate i
Cube child(const Cube& q, unsigned j);
std::vector<Cube> children(const GridSpec& g, const Cube& q);
unsigned child_slot(const Cube& parent_cube, const Cube& descendant);

// e(Q): for every coordinate i the three hyperplane values a_i, a_i + l/2,
// a_i + l, intersected with the closed cube.
struct Skeleton {
  Point lower;
  double length = 0;
  Eigen::MatrixXd planes;  // n x 3
};

Skeleton skeleton(const GridSpec& g, const Cube& q);
bool on_skeleton(const Skeleton& s, const Eigen::Ref<const Point>& x);

// Euclidean distance between the closure of j and e(i).
double skeleton_distance(const GridSpec& g, const Cube& i, const Cube& j);

// Distance from the closure of j to the union of the skeletons of all
// level-L cubes of `grid`, i.e. the hyperplanes shift_i + 2^(L-1) Z.
double lattice_skeleton_distance(const GridSpec& grid, const GridSpec& jgrid, const Cube& j, int level);

bool is_good(const GridSpec& g, const Cube& j, const GridSpec& other);
inline bool is_good(const GridSpec& g, const Cube& j) { return is_good(g, j, g); }

bool deeply_embedded(const GridSpec& g, const Cube& j, const Cube& i);
// J good and deeply embedded in I
inline bool good_embedded(const GridSpec& g, const Cube& j, const Cube& i) {
  return deeply_embedded(g, j, i) && is_good(g, j);
}

}  // namespace twl
