#pragma once

#include "twl/measure.hpp"

#include <optional>
#include <unordered_map>

namespace twl {

// Charged dyadic cubes over the joint support of two measures. A node is
// split while it holds at least two atoms and lies above the window floor.
class CubeTree {
 public:
  struct Node {
    Cube cube;
    int parent = -1;
    int depth = 0;
    std::vector<int> children;  // indexed by child slot, -1 when uncharged
    std::vector<int> sigma_atoms;
    std::vector<int> omega_atoms;
    double sigma_mass = 0.0;
    double omega_mass = 0.0;

    bool leaf() const;
    int atom_count() const { return static_cast<int>(sigma_atoms.size() + omega_atoms.size()); }
  };

  CubeTree(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega,
           std::optional<Cube> root = std::nullopt, int max_depth = -1);

  const GridSpec& grid() const { return grid_; }
  const AtomicMeasure& sigma() const { return *sigma_; }
  const AtomicMeasure& omega() const { return *omega_; }

  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int i) const { return nodes_[i]; }
  const Node& root() const { return nodes_.front(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  int find(const Cube& q) const;
  // deepest node containing q, or -1 when q is outside the root
  int locate(const Cube& q) const;
  // node indices of the subtree below i (i first, top-down order)
  std::vector<int> subtree(int i, int max_relative_depth = -1) const;
  // true when every leaf holds at most one atom
  bool separating() const { return separating_; }
  int height() const;

 private:
  GridSpec grid_;
  const AtomicMeasure* sigma_;
  const AtomicMeasure* omega_;
  std::vector<Node> nodes_;
  std::unordered_map<Cube, int, CubeHash> index_;
  bool separating_ = true;
};

// Smallest cube of the level window containing every atom of both measures.
Cube bounding_cube(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega);

// Every window cube containing an atom of either measure (all levels of the
// window), in canonical order.
std::vector<Cube> window_cubes(const GridSpec& g, const AtomicMeasure& sigma, const AtomicMeasure& omega);

}  // namespace twl
