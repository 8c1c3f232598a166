#include "treemorph/metrics.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>

namespace treemorph {

LaplacianMatrix LaplacianMatrix::from_adjacency(const AdjacencyMatrix& adj) {
  LaplacianMatrix lap;
  lap.n = adj.n;
  lap.entries.assign(static_cast<std::size_t>(adj.n) * adj.n, 0.0);
  for (int i = 0; i < adj.n; ++i) {
    int deg = 0;
    for (int j = 0; j < adj.n; ++j) {
      if (!adj.at(i, j)) continue;
      ++deg;
      lap.entries[static_cast<std::size_t>(i) * adj.n + j] = -1.0;
    }
    lap.entries[static_cast<std::size_t>(i) * adj.n + i] = deg;
  }
  return lap;
}

std::vector<double> laplacian_eigenvalues(const LaplacianMatrix& lap) {
  Eigen::MatrixXd m(lap.n, lap.n);
  for (int i = 0; i < lap.n; ++i) {
    for (int j = 0; j < lap.n; ++j) m(i, j) = lap.at(i, j);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& vals = solver.eigenvalues();  // ascending
  return {vals.data(), vals.data() + vals.size()};
}

double lambda2(const LaplacianMatrix& lap) {
  if (lap.n < 2) return 0.0;
  return laplacian_eigenvalues(lap)[1];
}

double lambda2_of_tree(const LabeledTree& tree) {
  return lambda2(LaplacianMatrix::from_adjacency(AdjacencyMatrix::from_tree(tree)));
}

double lambda2_of_proximity_graph(std::span<const Vec2> positions, double r_range) {
  const int n = static_cast<int>(positions.size());
  AdjacencyMatrix adj;
  adj.n = n;
  adj.cells.assign(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (distance(positions[i], positions[j]) < r_range) adj.set(i, j);
    }
  }
  return lambda2(LaplacianMatrix::from_adjacency(adj));
}

double lambda2_path_closed_form(int n) {
  return 2.0 * (1.0 - std::cos(M_PI / n));
}

DegreeHistogram DegreeHistogram::of(const LabeledTree& tree) {
  DegreeHistogram h;
  for (NodeId v = 1; v <= tree.node_count(); ++v) {
    const int d = tree.degree(v);
    if (d == 1) ++h.deg1;
    if (d == 2) ++h.deg2;
    if (d >= 2) ++h.deg_ge2;
  }
  return h;
}

bool is_path_tree(const LabeledTree& tree) {
  if (tree.node_count() == 2) return true;
  const DegreeHistogram h = DegreeHistogram::of(tree);
  return h.deg1 == 2 && h.deg2 == tree.node_count() - 2;
}

bool is_star_tree(const LabeledTree& tree) {
  if (tree.node_count() == 2) return true;
  return star_center(tree) != 0;
}

NodeId star_center(const LabeledTree& tree) {
  for (NodeId v = 1; v <= tree.node_count(); ++v) {
    if (tree.degree(v) == tree.node_count() - 1) return v;
  }
  return 0;
}

std::string MetricSeries::to_csv() const {
  std::string out =
      "time,round,lambda2_tree,lambda2_graph,coverage,"
      "deg1_count,deg2_count,deg_ge2_count,ops_committed\n";
  char buf[256];
  for (const MetricRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%d,%.9g,%.9g,%.9g,%d,%d,%d,%d\n",
                  r.time, r.round, r.lambda2_tree, r.lambda2_graph, r.coverage,
                  r.deg1_count, r.deg2_count, r.deg_ge2_count, r.ops_committed);
    out += buf;
  }
  return out;
}

}  // namespace treemorph
