#pragma once

#include <Eigen/Core>

namespace manifold_align {

enum class EigenOrder { smallest, largest };

/// m eigenpairs; values(i) pairs with vectors.col(i). Values run from the
/// requested end of the spectrum inward. Every vector is sign-normalized so
/// that its first entry of largest magnitude is positive.
struct EigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Eigenpairs of the symmetric part of A.
EigenResult sym_eigs(const Eigen::MatrixXd& a, Eigen::Index m, EigenOrder order);

/// Pairs of A v = lambda B v with B-orthonormal vectors. B is regularized by
/// 1e-9 * trace(B) / n on the diagonal before factorization; a diagonal B is
/// scaled directly instead of factorized.
EigenResult generalized_eigs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::Index m,
                             EigenOrder order);

/// -1/2 H (D o D) H with H the centering matrix.
Eigen::MatrixXd double_center(const Eigen::MatrixXd& distances);

/// Classical scaling coordinates from a centered Gram matrix: the d largest
/// eigenpairs, coordinates v * sqrt(lambda) with negative lambda clamped to 0.
/// Coordinates are evaluated as G v / sqrt(lambda) row by row, so identical
/// Gram rows always produce identical coordinates.
Eigen::MatrixXd classical_embedding(const Eigen::MatrixXd& gram, Eigen::Index d);

/// Similarity transform x -> scale * R x + translation, applied to row
/// vectors as scale * X R^T + t.
struct Transform {
  Eigen::VectorXd translation;
  Eigen::MatrixXd rotation;
  double scale = 1.0;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
  Transform inverse() const;
};

/// Least-squares similarity (or rigid, with allow_scale = false) transform
/// taking source rows onto target rows. The rotation may be improper
/// (det = -1) when a reflection fits better.
Transform procrustes_fit(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                         bool allow_scale = true);

/// Frobenius norm of target - transform(source).
double procrustes_residual(const Transform& transform, const Eigen::MatrixXd& source,
                           const Eigen::MatrixXd& target);

/// Count of singular values above rel_tol times the largest, after centering
/// the rows. Measures collapse of an embedding onto a lower-dimensional set.
Eigen::Index effective_rank(const Eigen::MatrixXd& coords, double rel_tol = 1e-6);

}  // namespace manifold_align
