#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <optional>
#include <vector>

namespace manifold_align {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Undirected weighted graph over n nodes: symmetric, no self-loops, strictly
/// positive weights. Immutable once built.
class NeighborGraph {
public:
  NeighborGraph() = default;
  /// Validates symmetry, positivity and the absence of self-loops.
  explicit NeighborGraph(SparseMatrix weights);

  /// Builds from undirected edges (i, j, w); each edge is listed once.
  static NeighborGraph from_edges(Eigen::Index n,
                                  const std::vector<Eigen::Triplet<double>>& edges);

  Eigen::Index size() const { return weights_.rows(); }
  const SparseMatrix& weights() const { return weights_; }
  /// Number of undirected edges.
  Eigen::Index edge_count() const { return weights_.nonZeros() / 2; }
  double weight(Eigen::Index i, Eigen::Index j) const { return weights_.coeff(i, j); }
  Eigen::Index degree_count(Eigen::Index i) const;

  /// Undirected edges with i < j, in column-major order.
  std::vector<Eigen::Triplet<double>> edges() const;

private:
  SparseMatrix weights_;
};

/// L = D - W together with the degree vector (the diagonal of D).
struct LaplacianPair {
  SparseMatrix laplacian;
  Eigen::VectorXd degree;

  Eigen::MatrixXd dense_laplacian() const { return Eigen::MatrixXd(laplacian); }
  Eigen::MatrixXd dense_degree() const { return degree.asDiagonal(); }
};

/// Exact k-nearest-neighbour graph by Euclidean distance (ties go to the lower
/// index), symmetrized by union, unit weights.
NeighborGraph knn_graph(const Eigen::MatrixXd& points, int k);

/// Replaces every edge weight by exp(-|x_i - x_j|^2 / t). Without t the mean
/// squared edge length is used.
NeighborGraph heat_kernel_weights(const NeighborGraph& g, const Eigen::MatrixXd& points,
                                  std::optional<double> t = std::nullopt);

LaplacianPair laplacian(const NeighborGraph& g);

struct Components {
  std::vector<Eigen::Index> label;
  Eigen::Index count = 0;
};

Components connected_components(const NeighborGraph& g);

/// Joins components by repeatedly adding the single shortest Euclidean link
/// between two different components (unit weight) until connected.
NeighborGraph connect_components(const NeighborGraph& g, const Eigen::MatrixXd& points);

/// Dijkstra over a neighbour graph with Euclidean edge lengths. Distances are
/// min-over-paths of the left-to-right accumulated edge lengths, which makes
/// the result independent of the order nodes are settled in.
class ShortestPaths {
public:
  ShortestPaths(const NeighborGraph& g, const Eigen::MatrixXd& points);

  Eigen::Index size() const { return lengths_.rows(); }

  /// Distances from one source node.
  Eigen::VectorXd from_source(Eigen::Index source) const;

  /// Entry j is the minimum over nodes a and paths a -> j of
  /// initial(a) + path length. Unseeded nodes carry +inf in `initial`.
  Eigen::VectorXd from_seeds(const Eigen::VectorXd& initial) const;

private:
  SparseMatrix lengths_;
};

/// All-pairs shortest-path lengths with Euclidean edge lengths, one heap-based
/// Dijkstra per source. Throws DisconnectedGraph if g is not connected.
Eigen::MatrixXd geodesic_distances(const NeighborGraph& g, const Eigen::MatrixXd& points);

/// Row i holds the distances from source i as computed by one Dijkstra pass;
/// the matrix is not symmetrized, so callers that build on it can reproduce
/// the exact per-source rounding. Throws DisconnectedGraph if g is not
/// connected.
Eigen::MatrixXd source_distances(const NeighborGraph& g, const Eigen::MatrixXd& points);

/// Dense pairwise Euclidean distance matrix of the rows of points.
Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& points);

}  // namespace manifold_align
