#include "manifold_align/graph.hpp"

#include "manifold_align/error.hpp"
#include "manifold_align/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

namespace manifold_align {

namespace {

double squared_distance(const Eigen::MatrixXd& columns, Eigen::Index i, Eigen::Index j) {
  return (columns.col(i) - columns.col(j)).squaredNorm();
}

void check_points(const Eigen::MatrixXd& points) {
  if (!points.allFinite()) throw InvalidArgument("points contain non-finite values");
}

}  // namespace

NeighborGraph::NeighborGraph(SparseMatrix weights) : weights_(std::move(weights)) {
  weights_.makeCompressed();
  if (weights_.rows() != weights_.cols()) throw InvalidArgument("weight matrix must be square");
  for (Eigen::Index c = 0; c < weights_.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(weights_, c); it; ++it) {
      if (it.row() == it.col()) throw InvalidArgument("graph has a self-loop");
      if (!(it.value() > 0.0) || !std::isfinite(it.value())) {
        throw InvalidArgument("graph weights must be finite and strictly positive");
      }
      if (weights_.coeff(it.col(), it.row()) != it.value()) {
        throw InvalidArgument("graph weights are not symmetric");
      }
    }
  }
}

NeighborGraph NeighborGraph::from_edges(Eigen::Index n,
                                        const std::vector<Eigen::Triplet<double>>& edges) {
  std::vector<Eigen::Triplet<double>> both;
  both.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    both.push_back(e);
    both.emplace_back(e.col(), e.row(), e.value());
  }
  SparseMatrix w(n, n);
  // Duplicate entries keep the last value instead of summing.
  w.setFromTriplets(both.begin(), both.end(), [](double, double b) { return b; });
  return NeighborGraph(std::move(w));
}

Eigen::Index NeighborGraph::degree_count(Eigen::Index i) const {
  return weights_.col(i).nonZeros();
}

std::vector<Eigen::Triplet<double>> NeighborGraph::edges() const {
  std::vector<Eigen::Triplet<double>> out;
  out.reserve(static_cast<std::size_t>(edge_count()));
  for (Eigen::Index c = 0; c < weights_.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(weights_, c); it; ++it) {
      if (it.row() < it.col()) out.emplace_back(it.row(), it.col(), it.value());
    }
  }
  return out;
}

NeighborGraph knn_graph(const Eigen::MatrixXd& points, int k) {
  check_points(points);
  const Eigen::Index n = points.rows();
  if (k < 1 || k >= n) {
    throw InvalidArgument("k = " + std::to_string(k) + " must satisfy 1 <= k < n = " +
                          std::to_string(n));
  }
  const Eigen::MatrixXd columns = points.transpose();
  std::vector<std::vector<Eigen::Index>> neighbours(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t query) {
    const auto q = static_cast<Eigen::Index>(query);
    std::vector<std::pair<double, Eigen::Index>> candidates;
    candidates.reserve(static_cast<std::size_t>(n - 1));
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != q) candidates.emplace_back(squared_distance(columns, q, j), j);
    }
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
    auto& out = neighbours[query];
    out.reserve(static_cast<std::size_t>(k));
    for (int m = 0; m < k; ++m) out.push_back(candidates[static_cast<std::size_t>(m)].second);
  });

  std::vector<Eigen::Triplet<double>> edges;
  edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j : neighbours[static_cast<std::size_t>(i)]) {
      edges.emplace_back(std::min(i, j), std::max(i, j), 1.0);
    }
  }
  return NeighborGraph::from_edges(n, edges);
}

NeighborGraph heat_kernel_weights(const NeighborGraph& g, const Eigen::MatrixXd& points,
                                  std::optional<double> t) {
  check_points(points);
  if (points.rows() != g.size()) throw InvalidArgument("points do not match graph size");
  const Eigen::MatrixXd columns = points.transpose();
  auto edges = g.edges();
  std::vector<double> lengths(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    lengths[e] = squared_distance(columns, edges[e].row(), edges[e].col());
  }
  double width = 0.0;
  if (t) {
    if (!(*t > 0.0) || !std::isfinite(*t)) throw InvalidArgument("heat kernel t must be > 0");
    width = *t;
  } else {
    width = lengths.empty()
                ? 1.0
                : std::accumulate(lengths.begin(), lengths.end(), 0.0) /
                      static_cast<double>(lengths.size());
    // All edges of zero length: every weight is exp(0) regardless of t.
    if (!(width > 0.0)) width = 1.0;
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    double w = std::exp(-lengths[e] / width);
    // Keep far edges in the graph rather than underflowing to zero.
    w = std::max(w, std::numeric_limits<double>::min());
    edges[e] = Eigen::Triplet<double>(edges[e].row(), edges[e].col(), w);
  }
  return NeighborGraph::from_edges(g.size(), edges);
}

LaplacianPair laplacian(const NeighborGraph& g) {
  const SparseMatrix& w = g.weights();
  Eigen::VectorXd degree = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index c = 0; c < w.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(w, c); it; ++it) degree(c) += it.value();
  }
  SparseMatrix diag(g.size(), g.size());
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(g.size()));
  for (Eigen::Index i = 0; i < g.size(); ++i) entries.emplace_back(i, i, degree(i));
  diag.setFromTriplets(entries.begin(), entries.end());
  SparseMatrix l = diag - w;
  l.makeCompressed();
  return {std::move(l), std::move(degree)};
}

Components connected_components(const NeighborGraph& g) {
  const Eigen::Index n = g.size();
  Components out;
  out.label.assign(static_cast<std::size_t>(n), -1);
  std::vector<Eigen::Index> stack;
  for (Eigen::Index start = 0; start < n; ++start) {
    if (out.label[static_cast<std::size_t>(start)] >= 0) continue;
    const Eigen::Index id = out.count++;
    out.label[static_cast<std::size_t>(start)] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const Eigen::Index v = stack.back();
      stack.pop_back();
      for (SparseMatrix::InnerIterator it(g.weights(), v); it; ++it) {
        auto& l = out.label[static_cast<std::size_t>(it.row())];
        if (l < 0) {
          l = id;
          stack.push_back(it.row());
        }
      }
    }
  }
  return out;
}

NeighborGraph connect_components(const NeighborGraph& g, const Eigen::MatrixXd& points) {
  check_points(points);
  const Eigen::MatrixXd columns = points.transpose();
  auto edges = g.edges();
  NeighborGraph current = g;
  for (Components comp = connected_components(current); comp.count > 1;
       comp = connected_components(current)) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index bi = -1, bj = -1;
    for (Eigen::Index i = 0; i < current.size(); ++i) {
      for (Eigen::Index j = i + 1; j < current.size(); ++j) {
        if (comp.label[static_cast<std::size_t>(i)] == comp.label[static_cast<std::size_t>(j)]) {
          continue;
        }
        const double d = squared_distance(columns, i, j);
        if (d < best) {
          best = d;
          bi = i;
          bj = j;
        }
      }
    }
    edges.emplace_back(bi, bj, 1.0);
    current = NeighborGraph::from_edges(g.size(), edges);
  }
  return current;
}

ShortestPaths::ShortestPaths(const NeighborGraph& g, const Eigen::MatrixXd& points)
    : lengths_(g.weights()) {
  check_points(points);
  if (points.rows() != g.size()) throw InvalidArgument("points do not match graph size");
  const Eigen::MatrixXd columns = points.transpose();
  for (Eigen::Index c = 0; c < lengths_.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(lengths_, c); it; ++it) {
      it.valueRef() = std::sqrt(squared_distance(columns, it.row(), c));
    }
  }
}

Eigen::VectorXd ShortestPaths::from_source(Eigen::Index source) const {
  Eigen::VectorXd initial =
      Eigen::VectorXd::Constant(size(), std::numeric_limits<double>::infinity());
  initial(source) = 0.0;
  return from_seeds(initial);
}

Eigen::VectorXd ShortestPaths::from_seeds(const Eigen::VectorXd& initial) const {
  using Entry = std::pair<double, Eigen::Index>;
  if (initial.size() != size()) throw InvalidArgument("seed vector does not match graph size");
  Eigen::VectorXd best = initial;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (Eigen::Index v = 0; v < size(); ++v) {
    if (std::isfinite(best(v))) heap.emplace(best(v), v);
  }
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > best(v)) continue;
    for (SparseMatrix::InnerIterator it(lengths_, v); it; ++it) {
      const double candidate = d + it.value();
      if (candidate < best(it.row())) {
        best(it.row()) = candidate;
        heap.emplace(candidate, it.row());
      }
    }
  }
  return best;
}

Eigen::MatrixXd source_distances(const NeighborGraph& g, const Eigen::MatrixXd& points) {
  const Components comp = connected_components(g);
  if (comp.count > 1) {
    throw DisconnectedGraph(static_cast<std::size_t>(comp.count),
                            "geodesic distances need a connected neighbour graph; raise k");
  }
  const ShortestPaths paths(g, points);
  const Eigen::Index n = g.size();
  // Column-major storage: fill columns, transpose once at the end.
  Eigen::MatrixXd by_column(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t source) {
    const auto s = static_cast<Eigen::Index>(source);
    by_column.col(s) = paths.from_source(s);
  });
  return by_column.transpose();
}

Eigen::MatrixXd geodesic_distances(const NeighborGraph& g, const Eigen::MatrixXd& points) {
  const Eigen::MatrixXd dist = source_distances(g, points);
  // The two directions of a path can round differently; keep the smaller.
  return dist.cwiseMin(dist.transpose());
}

Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& points) {
  check_points(points);
  const Eigen::Index n = points.rows();
  const Eigen::MatrixXd columns = points.transpose();
  Eigen::MatrixXd dist(n, n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t c) {
    const auto j = static_cast<Eigen::Index>(c);
    for (Eigen::Index i = 0; i < n; ++i) dist(i, j) = std::sqrt(squared_distance(columns, i, j));
  });
  return dist;
}

}  // namespace manifold_align
