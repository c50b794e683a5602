#include "doctest.h"

#include "manifold_align/error.hpp"
#include "manifold_align/graph.hpp"
#include "manifold_align/spectral.hpp"
#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <set>

using namespace manifold_align;

namespace {

std::set<std::pair<Eigen::Index, Eigen::Index>> edge_set(const NeighborGraph& g) {
  std::set<std::pair<Eigen::Index, Eigen::Index>> out;
  for (const auto& e : g.edges()) out.emplace(e.row(), e.col());
  return out;
}

// Random connected graph: a random spanning tree plus extra random edges.
NeighborGraph random_connected_graph(Eigen::Index n, int extra, std::mt19937_64& gen) {
  std::vector<Eigen::Triplet<double>> edges;
  for (Eigen::Index i = 1; i < n; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(0, i - 1);
    edges.emplace_back(pick(gen), i, 1.0);
  }
  std::uniform_int_distribution<Eigen::Index> any(0, n - 1);
  for (int e = 0; e < extra; ++e) {
    const Eigen::Index a = any(gen);
    const Eigen::Index b = any(gen);
    if (a != b) edges.emplace_back(std::min(a, b), std::max(a, b), 1.0);
  }
  return NeighborGraph::from_edges(n, edges);
}

Eigen::MatrixXd path_lengths(const NeighborGraph& g, const Eigen::MatrixXd& points) {
  const Eigen::Index n = g.size();
  Eigen::MatrixXd adj = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::infinity());
  for (const auto& e : g.edges()) {
    const double len = (points.row(e.row()) - points.row(e.col())).norm();
    adj(e.row(), e.col()) = len;
    adj(e.col(), e.row()) = len;
  }
  return adj;
}

}  // namespace

TEST_CASE("knn on collinear points") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, 1.0, 2.5;
  const NeighborGraph g = knn_graph(pts, 1);
  CHECK(edge_set(g) == std::set<std::pair<Eigen::Index, Eigen::Index>>{{0, 1}, {1, 2}});
  CHECK(g.weight(0, 1) == 1.0);
  CHECK_THROWS_AS(knn_graph(pts, 3), InvalidArgument);
  CHECK_THROWS_AS(knn_graph(pts, 0), InvalidArgument);
}

TEST_CASE("knn with k = n - 1 is complete") {
  std::mt19937_64 gen(1);
  const Eigen::MatrixXd pts = oracle::random_matrix(9, 2, gen);
  CHECK(knn_graph(pts, 8).edge_count() == 36);
}

TEST_CASE("knn matches exhaustive sort") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd pts = oracle::random_matrix(20, 3, gen);
    const auto expected = oracle::knn_sets(pts, 4);
    std::set<std::pair<Eigen::Index, Eigen::Index>> want;
    for (Eigen::Index i = 0; i < 20; ++i) {
      for (Eigen::Index j : expected[static_cast<std::size_t>(i)]) want.emplace(std::min(i, j), std::max(i, j));
    }
    const NeighborGraph g = knn_graph(pts, 4);
    CHECK(edge_set(g) == want);
    for (Eigen::Index i = 0; i < 20; ++i) CHECK(g.degree_count(i) >= 4);
  }
}

TEST_CASE("knn tie goes to lower index") {
  Eigen::MatrixXd pts(3, 1);
  pts << 0.0, -1.0, 1.0;
  // Point 0 is equidistant from 1 and 2; with k = 1 it picks 1. Points 1
  // and 2 both pick 0.
  CHECK(edge_set(knn_graph(pts, 1)) == std::set<std::pair<Eigen::Index, Eigen::Index>>{{0, 1}, {0, 2}});
}

TEST_CASE("heat kernel weights") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0, 0, 1, 0, 1, 1, 0, 1;
  const NeighborGraph square = NeighborGraph::from_edges(
      4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}});
  const NeighborGraph hk = heat_kernel_weights(square, pts);
  for (const auto& e : hk.edges()) CHECK(e.value() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(edge_set(hk) == edge_set(square));

  Eigen::MatrixXd dup(2, 2);
  dup << 0.5, 0.5, 0.5, 0.5;
  const NeighborGraph one = NeighborGraph::from_edges(2, {{0, 1, 1.0}});
  CHECK(heat_kernel_weights(one, dup, 2.0).weight(0, 1) == 1.0);

  Eigen::MatrixXd line(4, 1);
  line << 0.0, 1.0, 3.0, 6.0;
  const NeighborGraph path = NeighborGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  const NeighborGraph w = heat_kernel_weights(path, line, 4.0);
  CHECK(w.weight(0, 1) > w.weight(1, 2));
  CHECK(w.weight(1, 2) > w.weight(2, 3));
  CHECK(w.weight(2, 3) == doctest::Approx(std::exp(-9.0 / 4.0)));
  CHECK_THROWS_AS(heat_kernel_weights(path, line, 0.0), InvalidArgument);
  CHECK_THROWS_AS(heat_kernel_weights(path, line, -1.0), InvalidArgument);
}

TEST_CASE("graph validation") {
  SparseMatrix asym(2, 2);
  asym.insert(0, 1) = 1.0;
  CHECK_THROWS_AS(NeighborGraph{asym}, InvalidArgument);
  SparseMatrix loop(2, 2);
  loop.insert(0, 0) = 1.0;
  CHECK_THROWS_AS(NeighborGraph{loop}, InvalidArgument);
  CHECK_THROWS_AS(NeighborGraph::from_edges(2, {{0, 1, -1.0}}), InvalidArgument);
}

TEST_CASE("path graph laplacian") {
  const NeighborGraph path = NeighborGraph::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const LaplacianPair lp = laplacian(path);
  Eigen::Matrix3d expected;
  expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  CHECK((lp.dense_laplacian() - expected).norm() == 0.0);
  CHECK(lp.degree == Eigen::Vector3d(1, 2, 1));
}

TEST_CASE("laplacian quadratic form and spectrum") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  const NeighborGraph topo = random_connected_graph(10, 12, gen);
  std::vector<Eigen::Triplet<double>> weighted;
  for (const auto& e : topo.edges()) weighted.emplace_back(e.row(), e.col(), u(gen));
  const NeighborGraph g = NeighborGraph::from_edges(10, weighted);
  const LaplacianPair lp = laplacian(g);
  const Eigen::MatrixXd l = lp.dense_laplacian();
  CHECK((l - l.transpose()).norm() == 0.0);
  CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10);

  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd f = oracle::random_matrix(10, 1, gen);
    double half = 0.0;
    for (const auto& e : g.edges()) half += e.value() * (f(e.row()) - f(e.col())) * (f(e.row()) - f(e.col()));
    const double quad = f.dot(l * f);
    CHECK(quad >= -1e-12);
    CHECK(std::abs(quad - half) <= 1e-8 * std::max(1.0, std::abs(half)));
  }

  const EigenResult eig = sym_eigs(l, 10, EigenOrder::smallest);
  CHECK(std::abs(eig.values(0)) <= 1e-8);
  CHECK(eig.values(1) > 1e-6);
  const Eigen::VectorXd v0 = eig.vectors.col(0);
  CHECK((v0.array() - v0.mean()).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("geodesic distances") {
  Eigen::MatrixXd line(3, 1);
  line << 0.0, 1.0, 2.0;
  const NeighborGraph path = NeighborGraph::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const Eigen::MatrixXd d = geodesic_distances(path, line);
  CHECK(d(0, 2) == 2.0);
  CHECK(d.diagonal().cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd pts = oracle::random_matrix(50, 3, gen);
    const NeighborGraph g = random_connected_graph(50, 60, gen);
    const Eigen::MatrixXd got = geodesic_distances(g, pts);
    const Eigen::MatrixXd want = oracle::floyd_warshall(path_lengths(g, pts));
    CHECK((got - want).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((got - got.transpose()).norm() == 0.0);
    for (Eigen::Index i = 0; i < 50; i += 3) {
      for (Eigen::Index j = 0; j < 50; j += 5) {
        for (Eigen::Index m = 0; m < 50; m += 7) CHECK(got(i, j) <= got(i, m) + got(m, j) + 1e-9);
      }
    }
  }
}

TEST_CASE("disconnected graph reports component count") {
  Eigen::MatrixXd pts(4, 1);
  pts << 0.0, 1.0, 10.0, 11.0;
  const NeighborGraph g = knn_graph(pts, 1);
  CHECK(connected_components(g).count == 2);
  try {
    (void)geodesic_distances(g, pts);
    FAIL("expected DisconnectedGraph");
  } catch (const DisconnectedGraph& e) {
    CHECK(e.components() == 2);
    CHECK(std::string(e.what()).find("2 connected components") != std::string::npos);
  }
  const NeighborGraph fixed = connect_components(g, pts);
  CHECK(connected_components(fixed).count == 1);
  CHECK(fixed.weight(1, 2) == 1.0);
  CHECK(fixed.edge_count() == 3);
}

TEST_CASE("seeded shortest paths") {
  Eigen::MatrixXd line(4, 1);
  line << 0.0, 1.0, 2.0, 3.0;
  const NeighborGraph path = NeighborGraph::from_edges(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}});
  const ShortestPaths sp(path, line);
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd init(4);
  init << 5.0, inf, inf, 0.5;
  const Eigen::VectorXd d = sp.from_seeds(init);
  CHECK(d == Eigen::Vector4d(3.5, 2.5, 1.5, 0.5));
  CHECK(sp.from_source(0) == Eigen::Vector4d(0, 1, 2, 3));
}

TEST_CASE("euclidean distances") {
  Eigen::MatrixXd pts(3, 2);
  pts << 0, 0, 3, 4, 0, 1;
  const Eigen::MatrixXd d = euclidean_distances(pts);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);
  CHECK(d(0, 2) == 1.0);
}
