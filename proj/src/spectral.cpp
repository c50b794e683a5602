#include "manifold_align/spectral.hpp"

#include "manifold_align/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace manifold_align {

namespace {

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index pivot = 0;
  v.cwiseAbs().maxCoeff(&pivot);
  if (v(pivot) < 0.0) v = -v;
}

void check_square(const Eigen::MatrixXd& a, const char* name) {
  if (a.rows() != a.cols()) throw InvalidArgument(std::string(name) + " must be square");
  if (!a.allFinite()) throw InvalidArgument(std::string(name) + " has non-finite entries");
}

void check_count(Eigen::Index m, Eigen::Index n) {
  if (m < 1 || m > n) {
    throw InvalidArgument("requested " + std::to_string(m) + " eigenpairs of a " +
                          std::to_string(n) + "x" + std::to_string(n) + " problem");
  }
}

// Sorts a full ascending decomposition into the requested order, breaking
// near-ties by lexicographic comparison of the sign-normalized vectors, and
// keeps the first m pairs.
EigenResult select_pairs(const Eigen::VectorXd& values, Eigen::MatrixXd vectors, Eigen::Index m,
                         EigenOrder order) {
  const Eigen::Index n = values.size();
  for (Eigen::Index c = 0; c < n; ++c) normalize_sign(vectors.col(c));

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  if (order == EigenOrder::largest) std::reverse(idx.begin(), idx.end());

  const double scale = values.cwiseAbs().maxCoeff();
  const double tie = 1e-9 * (scale > 0.0 ? scale : 1.0);
  auto lex_less = [&](Eigen::Index a, Eigen::Index b) {
    const auto ca = vectors.col(a);
    const auto cb = vectors.col(b);
    return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
  };
  for (std::size_t begin = 0; begin < idx.size();) {
    std::size_t end = begin + 1;
    while (end < idx.size() && std::abs(values(idx[end]) - values(idx[end - 1])) < tie) ++end;
    if (end - begin > 1) std::sort(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                   idx.begin() + static_cast<std::ptrdiff_t>(end), lex_less);
    begin = end;
  }

  EigenResult out{Eigen::VectorXd(m), Eigen::MatrixXd(vectors.rows(), m)};
  for (Eigen::Index k = 0; k < m; ++k) {
    out.values(k) = values(idx[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = vectors.col(idx[static_cast<std::size_t>(k)]);
  }
  return out;
}

bool is_diagonal(const Eigen::MatrixXd& b) {
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    for (Eigen::Index r = 0; r < b.rows(); ++r) {
      if (r != c && b(r, c) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace

EigenResult sym_eigs(const Eigen::MatrixXd& a, Eigen::Index m, EigenOrder order) {
  check_square(a, "matrix");
  check_count(m, a.rows());
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalRank("symmetric eigensolver did not converge");
  return select_pairs(solver.eigenvalues(), solver.eigenvectors(), m, order);
}

EigenResult generalized_eigs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, Eigen::Index m,
                             EigenOrder order) {
  check_square(a, "A");
  check_square(b, "B");
  if (a.rows() != b.rows()) throw InvalidArgument("A and B differ in size");
  check_count(m, a.rows());
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd sym_a = 0.5 * (a + a.transpose());
  Eigen::MatrixXd sym_b = 0.5 * (b + b.transpose());
  const double eps = 1e-9 * sym_b.trace() / static_cast<double>(n);
  sym_b.diagonal().array() += eps;

  if (is_diagonal(sym_b)) {
    const Eigen::VectorXd diag = sym_b.diagonal();
    if ((diag.array() <= 0.0).any()) {
      throw NumericalRank("B is not positive definite after regularization");
    }
    const Eigen::VectorXd inv_sqrt = diag.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd reduced = inv_sqrt.asDiagonal() * sym_a * inv_sqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (reduced + reduced.transpose()));
    if (solver.info() != Eigen::Success) throw NumericalRank("eigensolver did not converge");
    Eigen::MatrixXd vectors = inv_sqrt.asDiagonal() * solver.eigenvectors();
    return select_pairs(solver.eigenvalues(), std::move(vectors), m, order);
  }

  Eigen::LLT<Eigen::MatrixXd> chol(sym_b);
  if (chol.info() != Eigen::Success) {
    throw NumericalRank("B is not positive definite after regularization");
  }
  const auto lower = chol.matrixL();
  // C = L^-1 A L^-T
  Eigen::MatrixXd reduced = lower.solve(sym_a);
  reduced = lower.solve(reduced.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (reduced + reduced.transpose()));
  if (solver.info() != Eigen::Success) throw NumericalRank("eigensolver did not converge");
  Eigen::MatrixXd vectors = chol.matrixU().solve(solver.eigenvectors());
  return select_pairs(solver.eigenvalues(), std::move(vectors), m, order);
}

Eigen::MatrixXd double_center(const Eigen::MatrixXd& distances) {
  const Eigen::Index n = distances.rows();
  if (distances.cols() != n) throw InvalidArgument("distance matrix must be square");
  if (!distances.allFinite()) throw InvalidArgument("distance matrix has non-finite entries");
  if ((distances.array() < 0.0).any()) throw InvalidArgument("distances must be nonnegative");
  const double scale = std::max(1.0, distances.cwiseAbs().maxCoeff());
  if ((distances - distances.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("distance matrix must be symmetric");
  }
  if (distances.diagonal().cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("distance matrix must have a zero diagonal");
  }
  const Eigen::MatrixXd squared = distances.array().square().matrix();
  const Eigen::VectorXd row_mean = squared.rowwise().mean();
  const double total_mean = row_mean.mean();
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      gram(i, j) = -0.5 * (squared(i, j) - row_mean(i) - row_mean(j) + total_mean);
    }
  }
  return gram;
}

Eigen::MatrixXd classical_embedding(const Eigen::MatrixXd& gram, Eigen::Index d) {
  const EigenResult top = sym_eigs(gram, d, EigenOrder::largest);
  const Eigen::Index n = gram.rows();
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(n, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    const double lambda = top.values(c);
    if (!(lambda > 0.0)) continue;
    const double inv_root = 1.0 / std::sqrt(lambda);
    for (Eigen::Index i = 0; i < n; ++i) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) acc += gram(i, k) * top.vectors(k, c);
      coords(i, c) = acc * inv_root;
    }
  }
  return coords;
}

Eigen::MatrixXd Transform::apply(const Eigen::MatrixXd& points) const {
  Eigen::MatrixXd out = scale * points * rotation.transpose();
  out.rowwise() += translation.transpose();
  return out;
}

Transform Transform::inverse() const {
  const Eigen::MatrixXd inv_rot = rotation.transpose();
  return {-(inv_rot * translation) / scale, inv_rot, 1.0 / scale};
}

Transform procrustes_fit(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                         bool allow_scale) {
  if (source.rows() != target.rows() || source.cols() != target.cols()) {
    throw InvalidArgument("Procrustes inputs must have the same shape");
  }
  if (source.rows() < 2) throw InvalidArgument("Procrustes needs at least two point pairs");
  if (!source.allFinite() || !target.allFinite()) {
    throw InvalidArgument("Procrustes inputs contain non-finite values");
  }
  const Eigen::RowVectorXd source_mean = source.colwise().mean();
  const Eigen::RowVectorXd target_mean = target.colwise().mean();
  const Eigen::MatrixXd a = source.rowwise() - source_mean;
  const Eigen::MatrixXd b = target.rowwise() - target_mean;
  const double spread = a.squaredNorm();
  if (!(spread > 0.0)) throw DegenerateInput("Procrustes source points have zero spread");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.transpose() * a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Transform t;
  t.rotation = svd.matrixU() * svd.matrixV().transpose();
  t.scale = allow_scale ? svd.singularValues().sum() / spread : 1.0;
  t.translation = target_mean.transpose() - t.scale * t.rotation * source_mean.transpose();
  return t;
}

double procrustes_residual(const Transform& transform, const Eigen::MatrixXd& source,
                           const Eigen::MatrixXd& target) {
  return (target - transform.apply(source)).norm();
}

Eigen::Index effective_rank(const Eigen::MatrixXd& coords, double rel_tol) {
  if (coords.rows() == 0 || coords.cols() == 0) return 0;
  const Eigen::MatrixXd centered = coords.rowwise() - coords.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
  const Eigen::VectorXd s = svd.singularValues();
  if (!(s(0) > 0.0)) return 0;
  return (s.array() > rel_tol * s(0)).count();
}

}  // namespace manifold_align
