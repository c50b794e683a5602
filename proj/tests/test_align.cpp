#include "doctest.h"

#include "manifold_align/align.hpp"
#include "manifold_align/error.hpp"
#include "manifold_align/eval.hpp"
#include "oracles.hpp"

#include <Eigen/LU>

#include <cmath>
#include <numbers>

using namespace manifold_align;

namespace {

const PendulumConfig kP1 = PendulumConfig::pendulum1();
const PendulumConfig kP2 = PendulumConfig::pendulum2();

Dataset with_features(const Dataset& ds, Eigen::MatrixXd features) {
  return Dataset(ds.config(), ds.grid_step(), ds.grid_angles(), ds.angles(), std::move(features));
}

Dataset random_dataset(Eigen::Index n, std::mt19937_64& gen) {
  std::vector<JointAngles> angles(static_cast<std::size_t>(n));
  return Dataset(kP1, 120, angles, angles, oracle::random_matrix(n, kFeatureDim, gen));
}

Eigen::MatrixXd stacked(const AlignmentResult& r) {
  Eigen::MatrixXd s(r.sx.size() + r.sy.size(), r.sx.dim());
  s << r.sx.coords(), r.sy.coords();
  return s;
}

double subspace_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  auto projector = [](const Eigen::MatrixXd& m) -> Eigen::MatrixXd {
    return m * (m.transpose() * m).inverse() * m.transpose();
  };
  return (projector(a) - projector(b)).norm();
}

struct Grid120 {
  Dataset x = generate_dataset(kP1, 120);
  Dataset y = generate_dataset(kP2, 120);
  CorrespondenceSet all = CorrespondenceSet::identity(81);
};

}  // namespace

TEST_CASE("name parsing") {
  for (Method m : {Method::procrustes, Method::local_laplacian, Method::local_weights, Method::global_distance}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(parse_level("feature") == Level::feature);
  CHECK(parse_distance_mode("euclidean") == DistanceMode::euclidean);
  CHECK_THROWS_AS(parse_method("cca"), InvalidArgument);
  CHECK_THROWS_AS(Embedding(Eigen::MatrixXd(3, 0)), InvalidArgument);
}

TEST_CASE("eigenmaps on a 12-cycle") {
  std::vector<Eigen::Triplet<double>> edges;
  for (int i = 0; i < 12; ++i) edges.emplace_back(std::min(i, (i + 1) % 12), std::max(i, (i + 1) % 12), 1.0);
  const NeighborGraph cycle = NeighborGraph::from_edges(12, edges);
  const Embedding e = eigenmaps_embed(cycle, 2);
  const Eigen::VectorXd radii = e.coords().rowwise().norm();
  CHECK((radii.array() - radii.mean()).abs().maxCoeff() <= 1e-6 * radii.mean());

  const Eigen::MatrixXd d = laplacian(cycle).dense_degree();
  CHECK((e.coords().transpose() * d * e.coords() - Eigen::Matrix2d::Identity()).norm() <= 1e-8);

  CHECK_THROWS_AS(eigenmaps_embed(cycle, 11), InvalidArgument);
  const NeighborGraph split = NeighborGraph::from_edges(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  CHECK_THROWS_AS(eigenmaps_embed(split, 1), DisconnectedGraph);
}

TEST_CASE("lpp embedding") {
  std::mt19937_64 gen(20);
  const Eigen::MatrixXd f = oracle::random_matrix(30, 5, gen);
  const NeighborGraph g = heat_kernel_weights(knn_graph(f, 5), f, 0.5);
  const auto [emb, proj] = lpp_embed(f, g, 2);
  CHECK(proj.rows() == 5);
  CHECK(proj.cols() == 2);
  CHECK((emb.coords() - f * proj).norm() == 0.0);

  // Two copies of every row, each copy wired to both copies of its neighbours.
  Eigen::MatrixXd f2(60, 5);
  f2 << f, f;
  std::vector<Eigen::Triplet<double>> edges;
  for (const auto& e : g.edges()) {
    for (Eigen::Index a : {Eigen::Index{0}, Eigen::Index{30}}) {
      for (Eigen::Index b : {Eigen::Index{0}, Eigen::Index{30}}) {
        const Eigen::Index i = e.row() + a;
        const Eigen::Index j = e.col() + b;
        edges.emplace_back(std::min(i, j), std::max(i, j), e.value());
      }
    }
  }
  const NeighborGraph g2 = NeighborGraph::from_edges(60, edges);
  const auto [emb2, proj2] = lpp_embed(f2, g2, 2);
  CHECK(subspace_gap(proj, proj2) <= 1e-6);

  const auto [full, square] = lpp_embed(f, g, 5);
  CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(square).rank() == 5);
  CHECK_THROWS_AS(lpp_embed(f, g, 6), InvalidArgument);
}

TEST_CASE("joint matrix assembly") {
  const NeighborGraph wx = NeighborGraph::from_edges(3, {{0, 1, 1.0}, {1, 2, 2.0}});
  const NeighborGraph wy = NeighborGraph::from_edges(2, {{0, 1, 0.5}});

  const JointMatrices decoupled = build_joint(wx, wy, CorrespondenceSet::identity(2), 0.0);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  expected.topLeftCorner(3, 3) = laplacian(wx).dense_laplacian();
  expected.bottomRightCorner(2, 2) = laplacian(wy).dense_laplacian();
  CHECK((decoupled.laplacian.dense_laplacian() - expected).norm() == 0.0);

  const CorrespondenceSet one({{2, 1}}, 3, 2);
  const JointMatrices joint = build_joint(wx, wy, one, 1.0);
  const Eigen::MatrixXd w = Eigen::MatrixXd(joint.graph.weights());
  CHECK((w.topRightCorner(3, 2).array() != 0.0).count() == 1);
  CHECK((w.bottomLeftCorner(2, 3).array() != 0.0).count() == 1);
  CHECK(w(2, 4) == 1.0);
  CHECK(w(4, 2) == 1.0);
  CHECK(joint.laplacian.dense_laplacian().rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(build_joint(wx, wy, CorrespondenceSet(), 1.0), Unconstrained);
  CHECK_THROWS_AS(build_joint(wx, wy, one, -1.0), InvalidArgument);
}

TEST_CASE("procrustes self-alignment and swap") {
  const Grid120 g;
  const AlignmentResult self = align_procrustes(g.x, g.x, g.all, Level::feature);
  REQUIRE(self.transform);
  CHECK(self.transform->scale == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((self.transform->rotation - Eigen::Matrix3d::Identity()).norm() <= 1e-8);
  CHECK((self.sx.coords() - self.sy.coords()).norm() <= 1e-8);

  const CorrespondenceSet corr = select_correspondences(g.x, g.y, 120);
  for (bool scale : {true, false}) {
    AlignOptions opt;
    opt.procrustes_scale = scale;
    const AlignmentResult fwd = align_procrustes(g.x, g.y, corr, Level::feature, opt);
    const AlignmentResult rev = align_procrustes(g.y, g.x, corr.swapped(), Level::feature, opt);
    // Rotations invert regardless of scale; the full similarity inverts when
    // the scale is fixed (least-squares scale is not symmetric).
    CHECK((fwd.transform->rotation * rev.transform->rotation - Eigen::Matrix3d::Identity()).norm() <= 1e-6);
    if (!scale) {
      const Transform composed_check = fwd.transform->inverse();
      CHECK((composed_check.translation - rev.transform->translation).norm() <= 1e-6);
    }
  }
}

TEST_CASE("procrustes instance level") {
  const Grid120 g;
  const AlignmentResult r = align_procrustes(g.x, g.y, g.all, Level::instance);
  CHECK(r.sx.dim() == 3);
  CHECK(r.sy.size() == 81);
  CHECK(!r.map_x);
  CHECK(r.sx.coords().allFinite());
}

TEST_CASE("local methods decouple without correspondences weight") {
  const Grid120 g;
  AlignOptions opt;
  opt.mu = 0.0;
  CHECK_THROWS_AS(align_local(g.x, g.y, g.all, Level::instance, Method::local_laplacian, opt),
                  DisconnectedGraph);
  CHECK_THROWS_AS(align_local(g.x, g.y, CorrespondenceSet(), Level::instance, Method::local_weights),
                  Unconstrained);
  CHECK_THROWS_AS(align_local(g.x, g.y, g.all, Level::instance, Method::procrustes), InvalidArgument);
}

TEST_CASE("instance-level local embeddings are degree-orthonormal") {
  const Grid120 g;
  const CorrespondenceSet corr = select_correspondences(g.x, g.y, 120);
  AlignOptions opt;
  for (Method m : {Method::local_laplacian, Method::local_weights}) {
    const AlignmentResult r = align_local(g.x, g.y, corr, Level::instance, m, opt);
    const bool heat = m == Method::local_weights;
    NeighborGraph gx = knn_graph(g.x.features(), opt.k);
    NeighborGraph gy = knn_graph(g.y.features(), opt.k);
    if (heat) {
      gx = heat_kernel_weights(gx, g.x.features());
      gy = heat_kernel_weights(gy, g.y.features());
    }
    const JointMatrices joint = build_joint(gx, gy, corr, opt.mu);
    const Eigen::MatrixXd v = stacked(r);
    const Eigen::MatrixXd gram = v.transpose() * joint.laplacian.degree.asDiagonal() * v;
    CHECK((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(r.eigenvalues.minCoeff() > 0.0);
  }
}

TEST_CASE("global method: identical inputs give identical rows") {
  const Grid120 g;
  const AlignmentResult r = align_global(g.x, g.x, g.all, Level::instance);
  CHECK((r.sx.coords().array() == r.sy.coords().array()).all());
  CHECK(r.sx.dim() == 3);
}

TEST_CASE("joint distances pass through correspondences") {
  const Dataset x = generate_dataset(kP1, 90);
  const Dataset y = generate_dataset(kP2, 90);
  const CorrespondenceSet corr = select_correspondences(x, y, 180);
  REQUIRE(corr.size() == 16);
  for (DistanceMode mode : {DistanceMode::geodesic, DistanceMode::euclidean}) {
    AlignOptions opt;
    opt.distance_mode = mode;
    const Eigen::MatrixXd j = joint_distances(x.features(), y.features(), corr, opt);
    const Eigen::Index nx = x.size();
    CHECK((j - j.transpose()).norm() == 0.0);
    CHECK(j.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(j.allFinite());
    const Eigen::MatrixXd dy = j.bottomRightCorner(y.size(), y.size());
    for (Eigen::Index i = 0; i < nx; i += 9) {
      for (Eigen::Index jj = 0; jj < y.size(); jj += 7) {
        for (Eigen::Index jp = 0; jp < y.size(); jp += 11) {
          CHECK(j(i, nx + jj) <= j(i, nx + jp) + dy(jp, jj) + 1e-9);
        }
      }
    }
    for (const auto& [a, b] : corr.pairs()) CHECK(j(a, nx + b) == 0.0);
  }
}

TEST_CASE("feature maps reproduce embeddings and map out of sample") {
  const Grid120 g;
  const CorrespondenceSet corr = select_correspondences(g.x, g.y, 120);
  for (Method m : {Method::procrustes, Method::local_laplacian, Method::local_weights, Method::global_distance}) {
    CAPTURE(to_string(m));
    const AlignmentResult r = align(g.x, g.y, corr, m, Level::feature);
    REQUIRE(r.map_x);
    REQUIRE(r.map_y);
    CHECK(r.map_x->rows() == kFeatureDim);
    CHECK(r.sx.dim() == 3);
    CHECK(r.sy.dim() == 3);
    CHECK((g.x.features() * *r.map_x - r.sx.coords()).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::MatrixXd y_mapped = (g.y.features() * *r.map_y).rowwise() + r.offset_y;
    CHECK((y_mapped - r.sy.coords()).cwiseAbs().maxCoeff() <= 1e-10);
    for (Eigen::Index i = 0; i < g.x.size(); ++i) {
      CHECK((map_out_of_sample(r, g.x.features().row(i).transpose(), Side::x).transpose().array() ==
             r.sx.coords().row(i).array()).all());
      CHECK((map_out_of_sample(r, g.y.features().row(i).transpose(), Side::y).transpose().array() ==
             r.sy.coords().row(i).array()).all());
    }
    CHECK(map_out_of_sample(r, Eigen::VectorXd::Zero(kFeatureDim), Side::x).norm() == 0.0);
    if (m != Method::procrustes) {
      CHECK(map_out_of_sample(r, Eigen::VectorXd::Zero(kFeatureDim), Side::y).norm() == 0.0);
    }
    CHECK_THROWS_AS(map_out_of_sample(r, Eigen::VectorXd::Zero(3), Side::x), InvalidArgument);
  }
  const AlignmentResult inst = align(g.x, g.y, corr, Method::local_laplacian, Level::instance);
  CHECK_THROWS_AS(map_out_of_sample(inst, g.x.features().row(0).transpose(), Side::x), Unsupported);
}

TEST_CASE("alignment is deterministic") {
  const Grid120 g;
  const CorrespondenceSet corr = select_correspondences(g.x, g.y, 120);
  for (Method m : {Method::procrustes, Method::local_laplacian, Method::local_weights, Method::global_distance}) {
    for (Level level : {Level::instance, Level::feature}) {
      const AlignmentResult a = align(g.x, g.y, corr, m, level);
      const AlignmentResult b = align(g.x, g.y, corr, m, level);
      CHECK((a.sx.coords().array() == b.sx.coords().array()).all());
      CHECK((a.sy.coords().array() == b.sy.coords().array()).all());
    }
  }
}

TEST_CASE("instance-level local embeddings ignore a common feature scale") {
  std::mt19937_64 gen(21);
  const Dataset x = random_dataset(60, gen);
  const Dataset y = random_dataset(60, gen);
  const CorrespondenceSet corr = CorrespondenceSet::identity(60);
  for (Method m : {Method::local_laplacian, Method::local_weights}) {
    const AlignmentResult base = align_local(x, y, corr, Level::instance, m);
    const AlignmentResult scaled = align_local(with_features(x, 7.5 * x.features()),
                                               with_features(y, 7.5 * y.features()), corr,
                                               Level::instance, m);
    const Eigen::MatrixXd a = stacked(base);
    const Eigen::MatrixXd b = stacked(scaled);
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      const double same = (a.col(c) - b.col(c)).cwiseAbs().maxCoeff();
      const double flipped = (a.col(c) + b.col(c)).cwiseAbs().maxCoeff();
      CHECK(std::min(same, flipped) <= 1e-8);
    }
  }
}

TEST_CASE("effective rank diagnostic") {
  const Grid120 g;
  const AlignmentResult r = align(g.x, g.y, g.all, Method::local_weights, Level::feature);
  CHECK(r.rank_x() >= 1);
  CHECK(r.rank_x() <= 3);
}
