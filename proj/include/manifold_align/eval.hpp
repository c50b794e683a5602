#pragma once

#include "manifold_align/align.hpp"
#include "manifold_align/pendulum.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace manifold_align {

/// Controls how the width (denominator) of the normalized distance is found.
struct DenominatorOptions {
  /// Always take the maximum over all pairs, whatever the size.
  bool exact = false;
  /// Above this many rows per side, a seeded random subset of this size is
  /// used instead. The sampled width never exceeds the exact one, so sampled
  /// distances are upper bounds of the exact ones.
  Eigen::Index sample_rows = 5000;
  std::uint64_t seed = 0;
};

struct NormalizedDistances {
  std::vector<double> values;
  double width = 0.0;
  bool sampled = false;
};

/// Largest Euclidean distance between any two rows.
double max_pairwise_distance(const Eigen::MatrixXd& points);

/// D_i = |sx(a_i) - sy(b_i)| / max(width(sx), width(sy)) for every pair
/// (a_i, b_i) of the pairing, where width is the largest distance between two
/// rows of one embedding.
NormalizedDistances normalized_distances(const Embedding& sx, const Embedding& sy,
                                         const CorrespondenceSet& pairing,
                                         const DenominatorOptions& options = {});

struct Metrics {
  std::vector<double> distances;
  double delta = 0.0;
  double sigma = 0.0;
  double elapsed = 0.0;
  std::string method;
  std::string level;
  std::string noise_type = "none";
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  Eigen::Index n = 0;
  Eigen::Index d = 0;
};

struct MetricTags {
  std::string method;
  std::string level;
  std::string noise_type = "none";
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  Eigen::Index d = 0;
};

/// Mean (delta) and standard deviation (sigma) of the distances. sigma
/// divides by n unless sample_std is set.
Metrics summarize(const std::vector<double>& distances, double elapsed, const MetricTags& tags,
                  bool sample_std = false);

}  // namespace manifold_align
