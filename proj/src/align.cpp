#include "manifold_align/align.hpp"

#include "manifold_align/error.hpp"
#include "manifold_align/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace manifold_align {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void require_connected(const NeighborGraph& g, const std::string& what) {
  const Components comp = connected_components(g);
  if (comp.count > 1) {
    throw DisconnectedGraph(static_cast<std::size_t>(comp.count),
                            what + " is disconnected; raise k or add correspondences");
  }
}

NeighborGraph side_graph(const Eigen::MatrixXd& points, const AlignOptions& options,
                         bool heat_kernel) {
  NeighborGraph g = knn_graph(points, options.k);
  if (options.repair_graphs) g = connect_components(g, points);
  if (heat_kernel) g = heat_kernel_weights(g, points, options.t);
  return g;
}

void check_options(const AlignOptions& options) {
  if (options.d < 1) throw InvalidArgument("embedding dimension d must be >= 1");
  if (options.k < 1) throw InvalidArgument("neighbour count k must be >= 1");
  if (!(options.mu >= 0.0) || !std::isfinite(options.mu)) {
    throw InvalidArgument("correspondence weight mu must be finite and >= 0");
  }
}

void check_corr(const CorrespondenceSet& corr, Eigen::Index nx, Eigen::Index ny) {
  for (const auto& [ix, iy] : corr.pairs()) {
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) {
      throw InvalidArgument("correspondence index out of range for the datasets");
    }
  }
}

// Drops leading near-zero pairs (constant directions) and keeps the next d.
EigenResult drop_trivial(const EigenResult& all, int d) {
  const double scale = all.values.cwiseAbs().maxCoeff();
  Eigen::Index first = 0;
  while (first < all.values.size() && all.values(first) <= 1e-9 * scale) ++first;
  if (all.values.size() - first < d) {
    throw NumericalRank("only " + std::to_string(all.values.size() - first) +
                        " nontrivial directions available for d = " + std::to_string(d));
  }
  return {all.values.segment(first, d), all.vectors.middleCols(first, d)};
}

// Row-by-row product so that mapping one training row out of sample gives
// bit-identical coordinates to the stored embedding.
Eigen::MatrixXd apply_map(const Eigen::MatrixXd& features, const Eigen::MatrixXd& map,
                          const Eigen::RowVectorXd& offset) {
  Eigen::MatrixXd out(features.rows(), map.cols());
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (Eigen::Index c = 0; c < map.cols(); ++c) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < map.rows(); ++k) acc += features(i, k) * map(k, c);
      out(i, c) = acc + offset(c);
    }
  }
  return out;
}

Eigen::MatrixXd block_diagonal(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(x.rows() + y.rows(), x.cols() + y.cols());
  f.topLeftCorner(x.rows(), x.cols()) = x;
  f.bottomRightCorner(y.rows(), y.cols()) = y;
  return f;
}

// Splits stacked projection vectors into per-side maps and embeds both sides.
void set_feature_maps(AlignmentResult& r, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                      const Eigen::MatrixXd& stacked) {
  r.map_x = stacked.topRows(x.cols());
  r.map_y = stacked.bottomRows(y.cols());
  r.offset_y = Eigen::RowVectorXd::Zero(stacked.cols());
  r.sx = Embedding(apply_map(x, *r.map_x, r.offset_y));
  r.sy = Embedding(apply_map(y, *r.map_y, r.offset_y));
}

void split_rows(AlignmentResult& r, const Eigen::MatrixXd& coords, Eigen::Index nx) {
  r.sx = Embedding(coords.topRows(nx));
  r.sy = Embedding(coords.bottomRows(coords.rows() - nx));
  r.offset_y = Eigen::RowVectorXd::Zero(coords.cols());
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::procrustes: return "procrustes";
    case Method::local_laplacian: return "local_laplacian";
    case Method::local_weights: return "local_weights";
    case Method::global_distance: return "global_distance";
  }
  return "unknown";
}

std::string to_string(Level level) { return level == Level::instance ? "instance" : "feature"; }

std::string to_string(DistanceMode mode) {
  return mode == DistanceMode::geodesic ? "geodesic" : "euclidean";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::procrustes, Method::local_laplacian, Method::local_weights,
                   Method::global_distance}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgument("unknown method '" + name +
                        "' (expected procrustes|local_laplacian|local_weights|global_distance)");
}

Level parse_level(const std::string& name) {
  if (name == "instance") return Level::instance;
  if (name == "feature") return Level::feature;
  throw InvalidArgument("unknown level '" + name + "' (expected instance|feature)");
}

DistanceMode parse_distance_mode(const std::string& name) {
  if (name == "geodesic") return DistanceMode::geodesic;
  if (name == "euclidean") return DistanceMode::euclidean;
  throw InvalidArgument("unknown distance mode '" + name + "' (expected geodesic|euclidean)");
}

Embedding::Embedding(Eigen::MatrixXd coords) : coords_(std::move(coords)) {
  if (coords_.cols() < 1) throw InvalidArgument("embedding needs at least one dimension");
  if (!coords_.allFinite()) throw NumericalRank("embedding has non-finite coordinates");
}

Embedding eigenmaps_embed(const NeighborGraph& g, int d) {
  const Eigen::Index n = g.size();
  if (d < 1 || d >= n - 1) {
    throw InvalidArgument("eigenmaps dimension d = " + std::to_string(d) +
                          " must satisfy 1 <= d < n - 1");
  }
  require_connected(g, "neighbour graph");
  const LaplacianPair lp = laplacian(g);
  const EigenResult pairs =
      generalized_eigs(lp.dense_laplacian(), lp.dense_degree(), d + 1, EigenOrder::smallest);
  // Connected graph: exactly one zero eigenvalue, the constant vector.
  return Embedding(pairs.vectors.rightCols(d));
}

std::pair<Embedding, Eigen::MatrixXd> lpp_embed(const Eigen::MatrixXd& features,
                                                const NeighborGraph& g, int d) {
  if (features.rows() != g.size()) throw InvalidArgument("features do not match graph size");
  const Eigen::Index p = features.cols();
  if (d < 1 || d > p) {
    throw InvalidArgument("LPP dimension d = " + std::to_string(d) + " must be in [1, " +
                          std::to_string(p) + "]");
  }
  const LaplacianPair lp = laplacian(g);
  const Eigen::MatrixXd lf = lp.laplacian * features;
  const Eigen::MatrixXd a = features.transpose() * lf;
  const Eigen::MatrixXd b = features.transpose() * (lp.degree.asDiagonal() * features);
  const EigenResult kept = drop_trivial(generalized_eigs(a, b, p, EigenOrder::smallest), d);
  Eigen::MatrixXd projection = kept.vectors;
  return {Embedding(features * projection), std::move(projection)};
}

JointMatrices build_joint(const NeighborGraph& wx, const NeighborGraph& wy,
                          const CorrespondenceSet& corr, double mu) {
  if (corr.empty()) {
    throw Unconstrained("no correspondences: the joint alignment would be unconstrained");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgument("mu must be finite and >= 0");
  const Eigen::Index nx = wx.size();
  const Eigen::Index ny = wy.size();
  check_corr(corr, nx, ny);
  std::vector<Eigen::Triplet<double>> edges = wx.edges();
  for (const auto& e : wy.edges()) edges.emplace_back(e.row() + nx, e.col() + nx, e.value());
  if (mu > 0.0) {
    for (const auto& [ix, iy] : corr.pairs()) edges.emplace_back(ix, iy + nx, mu);
  }
  JointMatrices joint;
  joint.graph = NeighborGraph::from_edges(nx + ny, edges);
  joint.laplacian = laplacian(joint.graph);
  joint.mu = mu;
  joint.nx = nx;
  joint.ny = ny;
  return joint;
}

Eigen::MatrixXd joint_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                const CorrespondenceSet& corr, const AlignOptions& options) {
  if (corr.empty()) throw Unconstrained("no correspondences to link the two distance matrices");
  const Eigen::Index nx = x.rows();
  const Eigen::Index ny = y.rows();
  check_corr(corr, nx, ny);
  constexpr double inf = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd joint(nx + ny, nx + ny);
  if (options.distance_mode == DistanceMode::geodesic) {
    const NeighborGraph gx = side_graph(x, options, false);
    const NeighborGraph gy = side_graph(y, options, false);
    const Eigen::MatrixXd dx = source_distances(gx, x);
    const Eigen::MatrixXd dy = source_distances(gy, y);
    const ShortestPaths px(gx, x);
    const ShortestPaths py(gy, y);
    joint.topLeftCorner(nx, nx) = dx;
    joint.bottomRightCorner(ny, ny) = dy;
    // x_i -> y_j: geodesic to a corresponding x_a, zero-length jump to y_b,
    // then continue the same accumulation through Y.
    parallel_for(static_cast<std::size_t>(nx), [&](std::size_t row) {
      const auto i = static_cast<Eigen::Index>(row);
      Eigen::VectorXd seeds = Eigen::VectorXd::Constant(ny, inf);
      for (const auto& [a, b] : corr.pairs()) seeds(b) = dx(i, a);
      joint.block(i, nx, 1, ny) = py.from_seeds(seeds).transpose();
    });
    parallel_for(static_cast<std::size_t>(ny), [&](std::size_t row) {
      const auto j = static_cast<Eigen::Index>(row);
      Eigen::VectorXd seeds = Eigen::VectorXd::Constant(nx, inf);
      for (const auto& [a, b] : corr.pairs()) seeds(a) = dy(j, b);
      joint.block(nx + j, 0, 1, nx) = px.from_seeds(seeds).transpose();
    });
  } else {
    const Eigen::MatrixXd dx = euclidean_distances(x);
    const Eigen::MatrixXd dy = euclidean_distances(y);
    joint.topLeftCorner(nx, nx) = dx;
    joint.bottomRightCorner(ny, ny) = dy;
    Eigen::MatrixXd cross = Eigen::MatrixXd::Constant(nx, ny, inf);
    parallel_for(static_cast<std::size_t>(ny), [&](std::size_t col) {
      const auto j = static_cast<Eigen::Index>(col);
      for (const auto& [a, b] : corr.pairs()) {
        const double tail = dy(b, j);
        for (Eigen::Index i = 0; i < nx; ++i) cross(i, j) = std::min(cross(i, j), dx(i, a) + tail);
      }
    });
    joint.topRightCorner(nx, ny) = cross;
    joint.bottomLeftCorner(ny, nx) = cross.transpose();
  }
  const Eigen::MatrixXd sym = joint.cwiseMin(joint.transpose());
  return sym;
}

AlignmentResult align_procrustes(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                                 Level level, const AlignOptions& options) {
  check_options(options);
  check_corr(corr, x.size(), y.size());
  if (corr.size() < 2) throw InvalidArgument("Procrustes alignment needs at least two pairs");
  const auto start = Clock::now();
  const NeighborGraph gx = side_graph(x.features(), options, true);
  const NeighborGraph gy = side_graph(y.features(), options, true);

  AlignmentResult r;
  r.method = Method::procrustes;
  r.level = level;
  Eigen::MatrixXd sx, sy, proj_x, proj_y;
  if (level == Level::feature) {
    auto [ex, ax] = lpp_embed(x.features(), gx, options.d);
    auto [ey, ay] = lpp_embed(y.features(), gy, options.d);
    sx = ex.coords();
    sy = ey.coords();
    proj_x = std::move(ax);
    proj_y = std::move(ay);
  } else {
    sx = eigenmaps_embed(gx, options.d).coords();
    sy = eigenmaps_embed(gy, options.d).coords();
  }

  Eigen::MatrixXd source(static_cast<Eigen::Index>(corr.size()), options.d);
  Eigen::MatrixXd target(static_cast<Eigen::Index>(corr.size()), options.d);
  for (std::size_t p = 0; p < corr.size(); ++p) {
    const auto [ix, iy] = corr.pairs()[p];
    target.row(static_cast<Eigen::Index>(p)) = sx.row(ix);
    source.row(static_cast<Eigen::Index>(p)) = sy.row(iy);
  }
  const Transform transform = procrustes_fit(source, target, options.procrustes_scale);
  r.transform = transform;

  if (level == Level::feature) {
    r.map_x = proj_x;
    r.map_y = proj_y * (transform.scale * transform.rotation.transpose());
    r.offset_y = transform.translation.transpose();
    r.sx = Embedding(apply_map(x.features(), *r.map_x, Eigen::RowVectorXd::Zero(options.d)));
    r.sy = Embedding(apply_map(y.features(), *r.map_y, r.offset_y));
  } else {
    r.sx = Embedding(sx);
    r.sy = Embedding(transform.apply(sy));
    r.offset_y = Eigen::RowVectorXd::Zero(options.d);
  }
  r.elapsed = seconds_since(start);
  return r;
}

AlignmentResult align_local(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                            Level level, Method variant, const AlignOptions& options) {
  check_options(options);
  if (variant != Method::local_laplacian && variant != Method::local_weights) {
    throw InvalidArgument("align_local variant must be local_laplacian or local_weights");
  }
  const auto start = Clock::now();
  const bool heat = variant == Method::local_weights;
  const NeighborGraph gx = side_graph(x.features(), options, heat);
  const NeighborGraph gy = side_graph(y.features(), options, heat);
  const JointMatrices joint = build_joint(gx, gy, corr, options.mu);
  require_connected(joint.graph, "joint graph");

  AlignmentResult r;
  r.method = variant;
  r.level = level;
  const Eigen::Index n = joint.nx + joint.ny;
  if (level == Level::instance) {
    if (options.d >= n - 1) throw InvalidArgument("d must be smaller than n - 1");
    const EigenResult pairs =
        generalized_eigs(joint.laplacian.dense_laplacian(), joint.laplacian.dense_degree(),
                         options.d + 1, EigenOrder::smallest);
    r.eigenvalues = pairs.values.tail(options.d);
    split_rows(r, pairs.vectors.rightCols(options.d), joint.nx);
  } else {
    const Eigen::MatrixXd f = block_diagonal(x.features(), y.features());
    if (options.d > f.cols()) throw InvalidArgument("d exceeds the joint feature dimension");
    const Eigen::MatrixXd a = f.transpose() * (joint.laplacian.laplacian * f);
    const Eigen::MatrixXd b = f.transpose() * (joint.laplacian.degree.asDiagonal() * f);
    const EigenResult kept =
        drop_trivial(generalized_eigs(a, b, f.cols(), EigenOrder::smallest), options.d);
    r.eigenvalues = kept.values;
    set_feature_maps(r, x.features(), y.features(), kept.vectors);
  }
  r.elapsed = seconds_since(start);
  return r;
}

AlignmentResult align_global(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                             Level level, const AlignOptions& options) {
  check_options(options);
  const auto start = Clock::now();
  const Eigen::MatrixXd distances = joint_distances(x.features(), y.features(), corr, options);
  const Eigen::MatrixXd gram = double_center(distances);
  if (!(gram.cwiseAbs().maxCoeff() > 0.0)) throw DegenerateInput("joint Gram matrix is zero");

  AlignmentResult r;
  r.method = Method::global_distance;
  r.level = level;
  if (level == Level::instance) {
    if (options.d > gram.rows()) throw InvalidArgument("d exceeds the number of instances");
    split_rows(r, classical_embedding(gram, options.d), x.size());
  } else {
    const Eigen::MatrixXd f = block_diagonal(x.features(), y.features());
    if (options.d > f.cols()) throw InvalidArgument("d exceeds the joint feature dimension");
    const Eigen::MatrixXd a = f.transpose() * gram * f;
    const Eigen::MatrixXd b = f.transpose() * f;
    const EigenResult top = generalized_eigs(a, b, options.d, EigenOrder::largest);
    r.eigenvalues = top.values;
    set_feature_maps(r, x.features(), y.features(), top.vectors);
  }
  r.elapsed = seconds_since(start);
  return r;
}

AlignmentResult align(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                      Method method, Level level, const AlignOptions& options) {
  switch (method) {
    case Method::procrustes: return align_procrustes(x, y, corr, level, options);
    case Method::local_laplacian:
    case Method::local_weights: return align_local(x, y, corr, level, method, options);
    case Method::global_distance: return align_global(x, y, corr, level, options);
  }
  throw InvalidArgument("unknown method");
}

Eigen::VectorXd map_out_of_sample(const AlignmentResult& result, const Eigen::VectorXd& feature,
                                  Side side) {
  if (result.level != Level::feature || !result.map_x || !result.map_y) {
    throw Unsupported(
        "instance-level alignments have no feature map; new samples require realignment");
  }
  const Eigen::MatrixXd& map = side == Side::x ? *result.map_x : *result.map_y;
  if (feature.size() != map.rows()) {
    throw InvalidArgument("feature has " + std::to_string(feature.size()) + " entries, map expects " +
                          std::to_string(map.rows()));
  }
  const Eigen::RowVectorXd offset =
      side == Side::y ? result.offset_y : Eigen::RowVectorXd::Zero(map.cols());
  return apply_map(feature.transpose(), map, offset).transpose();
}

}  // namespace manifold_align
