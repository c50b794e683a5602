#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library paths they check.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

/// Neighbour sets from a full sort of all pairwise distances.
inline std::vector<std::set<Eigen::Index>> knn_sets(const Eigen::MatrixXd& points, int k) {
  const Eigen::Index n = points.rows();
  std::vector<std::set<Eigen::Index>> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Eigen::Index>> all;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) all.emplace_back((points.row(i) - points.row(j)).norm(), j);
    }
    std::sort(all.begin(), all.end());
    for (int m = 0; m < k; ++m) out[static_cast<std::size_t>(i)].insert(all[static_cast<std::size_t>(m)].second);
  }
  return out;
}

/// All-pairs shortest paths by Floyd-Warshall from an adjacency length
/// matrix (+inf where there is no edge).
inline Eigen::MatrixXd floyd_warshall(Eigen::MatrixXd dist) {
  const Eigen::Index n = dist.rows();
  for (Eigen::Index i = 0; i < n; ++i) dist(i, i) = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) dist(i, j) = std::min(dist(i, j), dist(i, m) + dist(m, j));
    }
  }
  return dist;
}

/// Normalized correspondence distances by direct iteration over all pairs,
/// identity pairing.
inline std::vector<double> normalized_distances(const Eigen::MatrixXd& sx, const Eigen::MatrixXd& sy) {
  auto dist = [](const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) s += (a(i, c) - b(j, c)) * (a(i, c) - b(j, c));
    return std::sqrt(s);
  };
  double width = 0.0;
  for (Eigen::Index j = 0; j < sx.rows(); ++j) {
    for (Eigen::Index k = 0; k < sx.rows(); ++k) width = std::max(width, dist(sx, j, sx, k));
  }
  for (Eigen::Index j = 0; j < sy.rows(); ++j) {
    for (Eigen::Index k = 0; k < sy.rows(); ++k) width = std::max(width, dist(sy, j, sy, k));
  }
  std::vector<double> out;
  for (Eigen::Index i = 0; i < sx.rows(); ++i) out.push_back(dist(sx, i, sy, i) / width);
  return out;
}

/// Best 2-D similarity residual over rotations on a grid of `step_deg`
/// degrees (optimal scale and translation in closed form per rotation).
inline double rotation_grid_residual(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target,
                                     double step_deg) {
  const Eigen::MatrixXd a = source.rowwise() - source.colwise().mean();
  const Eigen::MatrixXd b = target.rowwise() - target.colwise().mean();
  double best = std::numeric_limits<double>::infinity();
  const int steps = static_cast<int>(std::lround(360.0 / step_deg));
  for (int s = 0; s < steps; ++s) {
    const double th = s * step_deg * std::numbers::pi / 180.0;
    Eigen::Matrix2d r;
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const Eigen::MatrixXd ar = a * r.transpose();
    const double scale = std::max(0.0, (ar.cwiseProduct(b)).sum() / a.squaredNorm());
    best = std::min(best, (b - scale * ar).norm());
  }
  return best;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(gen);
  }
  return m;
}

inline Eigen::MatrixXd random_symmetric(Eigen::Index n, std::mt19937_64& gen) {
  const Eigen::MatrixXd m = random_matrix(n, n, gen);
  return 0.5 * (m + m.transpose());
}

inline Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& gen) {
  const Eigen::MatrixXd m = random_matrix(n, n, gen);
  return m * m.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace oracle
