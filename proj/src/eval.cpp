#include "manifold_align/eval.hpp"

#include "manifold_align/error.hpp"
#include "manifold_align/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace manifold_align {

namespace {

double row_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                    Eigen::Index j) {
  double sum = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    const double diff = a(i, c) - b(j, c);
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

Eigen::MatrixXd sample_rows(const Eigen::MatrixXd& points, Eigen::Index count, std::uint64_t seed) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(points.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  std::mt19937_64 gen(seed);
  std::shuffle(rows.begin(), rows.end(), gen);
  rows.resize(static_cast<std::size_t>(count));
  std::sort(rows.begin(), rows.end());
  Eigen::MatrixXd out(count, points.cols());
  for (Eigen::Index r = 0; r < count; ++r) out.row(r) = points.row(rows[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace

double max_pairwise_distance(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  std::vector<double> row_max(static_cast<std::size_t>(n), 0.0);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t r) {
    const auto j = static_cast<Eigen::Index>(r);
    double best = 0.0;
    for (Eigen::Index k = j + 1; k < n; ++k) best = std::max(best, row_distance(points, j, points, k));
    row_max[r] = best;
  });
  return row_max.empty() ? 0.0 : *std::max_element(row_max.begin(), row_max.end());
}

NormalizedDistances normalized_distances(const Embedding& sx, const Embedding& sy,
                                         const CorrespondenceSet& pairing,
                                         const DenominatorOptions& options) {
  if (sx.dim() != sy.dim()) throw InvalidArgument("embeddings differ in dimension");
  if (sx.size() < 2 || sy.size() < 2) throw InvalidArgument("each embedding needs at least 2 rows");
  if (pairing.empty()) throw InvalidArgument("pairing is empty");
  for (const auto& [i, j] : pairing.pairs()) {
    if (i < 0 || i >= sx.size() || j < 0 || j >= sy.size()) {
      throw InvalidArgument("pairing index out of range");
    }
  }

  NormalizedDistances out;
  auto width = [&](const Eigen::MatrixXd& coords, std::uint64_t seed) {
    if (options.exact || coords.rows() <= options.sample_rows) return max_pairwise_distance(coords);
    out.sampled = true;
    return max_pairwise_distance(sample_rows(coords, options.sample_rows, seed));
  };
  out.width = std::max(width(sx.coords(), options.seed), width(sy.coords(), options.seed + 1));
  if (!(out.width > 0.0)) {
    throw DegenerateInput("both embeddings collapse to a single point; distances undefined");
  }
  out.values.reserve(pairing.size());
  for (const auto& [i, j] : pairing.pairs()) {
    out.values.push_back(row_distance(sx.coords(), i, sy.coords(), j) / out.width);
  }
  return out;
}

Metrics summarize(const std::vector<double>& distances, double elapsed, const MetricTags& tags,
                  bool sample_std) {
  if (distances.empty()) throw InvalidArgument("cannot summarize an empty distance list");
  if (sample_std && distances.size() < 2) {
    throw InvalidArgument("sample standard deviation needs at least two distances");
  }
  Metrics m;
  m.distances = distances;
  const double n = static_cast<double>(distances.size());
  m.delta = std::accumulate(distances.begin(), distances.end(), 0.0) / n;
  double squares = 0.0;
  for (double v : distances) squares += (v - m.delta) * (v - m.delta);
  m.sigma = std::sqrt(squares / (sample_std ? n - 1.0 : n));
  m.elapsed = elapsed;
  m.method = tags.method;
  m.level = tags.level;
  m.noise_type = tags.noise_type;
  m.noise_level = tags.noise_level;
  m.seed = tags.seed;
  m.n = static_cast<Eigen::Index>(distances.size());
  m.d = tags.d;
  return m;
}

}  // namespace manifold_align
