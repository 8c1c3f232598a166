#pragma once

#include <span>
#include <string>
#include <vector>

#include "treemorph/geometry.hpp"
#include "treemorph/tree.hpp"

namespace treemorph {

// Graph Laplacian L = D - A: diagonal holds degrees, off-diagonal entries are
// 0 or -1. Symmetric positive semidefinite with smallest eigenvalue 0.
struct LaplacianMatrix {
  int n = 0;
  std::vector<double> entries;  // row-major n*n

  static LaplacianMatrix from_adjacency(const AdjacencyMatrix& adj);

  double at(int i, int j) const {
    return entries[static_cast<std::size_t>(i) * n + j];
  }
};

// All eigenvalues, ascending. Dense symmetric solve; fine at desk scale.
std::vector<double> laplacian_eigenvalues(const LaplacianMatrix& lap);

// Second-smallest eigenvalue: the algebraic connectivity. Zero iff the graph
// is disconnected.
double lambda2(const LaplacianMatrix& lap);
double lambda2_of_tree(const LabeledTree& tree);

// lambda2 of the full proximity graph: an edge between every pair strictly
// closer than r_range.
double lambda2_of_proximity_graph(std::span<const Vec2> positions, double r_range);

// Closed form for the path graph on n nodes: 2(1 - cos(pi/n)).
double lambda2_path_closed_form(int n);

struct DegreeHistogram {
  int deg1 = 0;     // leaves
  int deg2 = 0;     // exactly 2
  int deg_ge2 = 0;  // 2 or more

  static DegreeHistogram of(const LabeledTree& tree);
};

bool is_path_tree(const LabeledTree& tree);
bool is_star_tree(const LabeledTree& tree);
// Center of a star (the unique node of degree n-1), or 0 if not a star.
NodeId star_center(const LabeledTree& tree);

// One experiment sample per protocol round.
struct MetricRow {
  double time = 0.0;  // simulated seconds at the end of the round
  int round = 0;
  double lambda2_tree = 0.0;
  double lambda2_graph = 0.0;
  double coverage = 0.0;
  int deg1_count = 0;
  int deg2_count = 0;
  int deg_ge2_count = 0;
  int ops_committed = 0;
};

struct MetricSeries {
  std::vector<MetricRow> rows;

  // Fixed header; numbers formatted deterministically (%.9g).
  std::string to_csv() const;
};

}  // namespace treemorph
