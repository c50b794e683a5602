#pragma once

#include "manifold_align/graph.hpp"
#include "manifold_align/pendulum.hpp"
#include "manifold_align/spectral.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <utility>

namespace manifold_align {

enum class Method { procrustes, local_laplacian, local_weights, global_distance };
enum class Level { instance, feature };
enum class DistanceMode { geodesic, euclidean };
enum class Side { x, y };

std::string to_string(Method method);
std::string to_string(Level level);
std::string to_string(DistanceMode mode);
Method parse_method(const std::string& name);
Level parse_level(const std::string& name);
DistanceMode parse_distance_mode(const std::string& name);

/// Low-dimensional coordinates, one row per instance.
class Embedding {
public:
  Embedding() = default;
  /// Throws InvalidArgument on zero columns or non-finite entries.
  explicit Embedding(Eigen::MatrixXd coords);

  const Eigen::MatrixXd& coords() const { return coords_; }
  Eigen::Index size() const { return coords_.rows(); }
  Eigen::Index dim() const { return coords_.cols(); }

private:
  Eigen::MatrixXd coords_;
};

struct AlignOptions {
  int d = 3;
  int k = 8;
  /// Heat-kernel width; empty means the mean squared edge length.
  std::optional<double> t;
  double mu = 100.0;
  DistanceMode distance_mode = DistanceMode::geodesic;
  /// Include the scale factor in the Procrustes stage.
  bool procrustes_scale = true;
  /// Link disconnected k-NN components instead of failing.
  bool repair_graphs = false;
};

struct AlignmentResult {
  Embedding sx;
  Embedding sy;
  Method method = Method::procrustes;
  Level level = Level::instance;
  /// Feature-level only: sx = X map_x, sy = Y map_y + offset_y.
  std::optional<Eigen::MatrixXd> map_x;
  std::optional<Eigen::MatrixXd> map_y;
  /// Nonzero only for the Procrustes method, whose translation cannot be
  /// folded into a linear map.
  Eigen::RowVectorXd offset_y;
  /// Eigenvalues of the retained directions (for Procrustes: of the X side).
  Eigen::VectorXd eigenvalues;
  /// Method 1 only: the similarity taking the Y embedding onto X.
  std::optional<Transform> transform;
  double elapsed = 0.0;

  Eigen::Index rank_x() const { return effective_rank(sx.coords()); }
  Eigen::Index rank_y() const { return effective_rank(sy.coords()); }
};

/// Joint weight matrix [[W_X, mu C], [mu C^T, W_Y]] and its Laplacian.
struct JointMatrices {
  NeighborGraph graph;
  LaplacianPair laplacian;
  double mu = 0.0;
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;
};

/// Laplacian eigenmaps: L f = lambda D f, the d smallest nontrivial pairs.
Embedding eigenmaps_embed(const NeighborGraph& g, int d);

/// Locality preserving projections: F^T L F a = lambda F^T D F a, the d
/// smallest pairs. Returns the embedding F A and the p x d projection A.
std::pair<Embedding, Eigen::MatrixXd> lpp_embed(const Eigen::MatrixXd& features,
                                                const NeighborGraph& g, int d);

/// Throws Unconstrained when corr is empty. mu = 0 is accepted and yields the
/// block-diagonal (decoupled) matrices.
JointMatrices build_joint(const NeighborGraph& wx, const NeighborGraph& wy,
                          const CorrespondenceSet& corr, double mu);

/// Cross-set distance matrix for the global method, laid out as
/// [[D_X, C], [C^T, D_Y]] with correspondence links of length zero.
Eigen::MatrixXd joint_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                const CorrespondenceSet& corr, const AlignOptions& options);

/// Method 1: embed each side separately (LPP or eigenmaps), then fit a
/// Procrustes transform on the correspondence rows mapping Y onto X.
AlignmentResult align_procrustes(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                                 Level level, const AlignOptions& options = {});

/// Methods 2 (binary k-NN weights) and 3 (heat-kernel weights): embed the
/// joint graph.
AlignmentResult align_local(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                            Level level, Method variant, const AlignOptions& options = {});

/// Method 4: classical scaling of the joint distance matrix (instance level)
/// or its linear-map analogue (feature level).
AlignmentResult align_global(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                             Level level, const AlignOptions& options = {});

AlignmentResult align(const Dataset& x, const Dataset& y, const CorrespondenceSet& corr,
                      Method method, Level level, const AlignOptions& options = {});

/// Feature-level results only; throws Unsupported for instance level.
Eigen::VectorXd map_out_of_sample(const AlignmentResult& result, const Eigen::VectorXd& feature,
                                  Side side);

}  // namespace manifold_align
