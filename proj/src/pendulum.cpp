#include "manifold_align/pendulum.hpp"

#include "manifold_align/error.hpp"
#include "manifold_align/parallel.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

namespace manifold_align {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double wrap_degrees(double angle) {
  double wrapped = std::fmod(angle, 360.0);
  if (wrapped < 0.0) wrapped += 360.0;
  // fmod of a tiny negative value can round up to exactly 360.
  if (wrapped >= 360.0) wrapped = 0.0;
  return wrapped;
}

Eigen::Matrix3d rotation_zy(double z_degrees, double y_degrees) {
  return (Eigen::AngleAxisd(z_degrees * kDegToRad, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(y_degrees * kDegToRad, Eigen::Vector3d::UnitY()))
      .toRotationMatrix();
}

void check_step(int step_degrees) {
  if (step_degrees <= 0 || 360 % step_degrees != 0) {
    throw InvalidArgument("angle step " + std::to_string(step_degrees) +
                          " must be a positive divisor of 360");
  }
}

long grid_coordinate(double angle, int step) { return std::lround(angle) / step; }

bool on_grid(const JointAngles& a, int step) {
  for (double v : {a.theta1y, a.theta1z, a.theta2y, a.theta2z}) {
    if (std::lround(v) % step != 0) return false;
  }
  return true;
}

Eigen::Index grid_index_of(const JointAngles& a, int step) {
  const long m = 360 / step;
  return ((grid_coordinate(a.theta1y, step) * m + grid_coordinate(a.theta1z, step)) * m +
          grid_coordinate(a.theta2y, step)) *
             m +
         grid_coordinate(a.theta2z, step);
}

// One generator per row so that noise draws are independent of thread
// scheduling. Streams for the two noise kinds are salted apart.
std::mt19937_64 row_stream(std::uint64_t seed, Eigen::Index row, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32), salt};
  return std::mt19937_64(seq);
}

// Uniform in [-range, range) from the top 53 bits of one draw.
double symmetric_uniform(std::mt19937_64& gen, double range) {
  const double unit = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return range * (2.0 * unit - 1.0);
}

void check_range(double range) {
  if (!(range >= 0.0) || !std::isfinite(range)) {
    throw InvalidArgument("noise range must be a finite value >= 0");
  }
}

}  // namespace

void PendulumConfig::validate() const {
  if (!(l1 > 0.0) || !(l2 > 0.0)) throw InvalidArgument("limb lengths must be positive");
  if (!(l2 < l1)) throw InvalidArgument("second limb must be shorter than the first (l2 < l1)");
}

JointAngles JointAngles::normalized() const {
  return {wrap_degrees(theta1y), wrap_degrees(theta1z), wrap_degrees(theta2y),
          wrap_degrees(theta2z)};
}

std::string to_string(NoiseType type) {
  return type == NoiseType::joint ? "joint" : "coordinate";
}

NoiseType parse_noise_type(const std::string& name) {
  if (name == "joint") return NoiseType::joint;
  if (name == "coordinate") return NoiseType::coordinate;
  throw InvalidArgument("unknown noise type '" + name + "' (expected joint|coordinate)");
}

Dataset::Dataset(PendulumConfig config, int grid_step, std::vector<JointAngles> grid_angles,
                 std::vector<JointAngles> angles, Eigen::MatrixXd features,
                 std::vector<NoiseRecord> noise)
    : config_(config),
      grid_step_(grid_step),
      grid_angles_(std::move(grid_angles)),
      angles_(std::move(angles)),
      features_(std::move(features)),
      noise_(std::move(noise)) {
  config_.validate();
  check_step(grid_step_);
  const auto n = static_cast<std::size_t>(features_.rows());
  if (features_.cols() != kFeatureDim || grid_angles_.size() != n || angles_.size() != n) {
    throw InvalidArgument("dataset needs n x 11 features with n grid and pose angle rows");
  }
}

Sample Dataset::sample(Eigen::Index row) const {
  return {angles_.at(static_cast<std::size_t>(row)), features_.row(row).transpose()};
}

CorrespondenceSet::CorrespondenceSet(std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs,
                                     Eigen::Index nx, Eigen::Index ny)
    : pairs_(std::move(pairs)) {
  std::set<Eigen::Index> seen_x, seen_y;
  for (const auto& [ix, iy] : pairs_) {
    if (ix < 0 || ix >= nx || iy < 0 || iy >= ny) {
      throw InvalidArgument("correspondence (" + std::to_string(ix) + ", " + std::to_string(iy) +
                            ") out of range");
    }
    if (!seen_x.insert(ix).second || !seen_y.insert(iy).second) {
      throw InvalidArgument("correspondence index used twice: (" + std::to_string(ix) + ", " +
                            std::to_string(iy) + ")");
    }
  }
}

CorrespondenceSet CorrespondenceSet::identity(Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) pairs.emplace_back(i, i);
  return CorrespondenceSet(std::move(pairs), n, n);
}

CorrespondenceSet CorrespondenceSet::swapped() const {
  CorrespondenceSet out;
  out.pairs_.reserve(pairs_.size());
  for (const auto& [ix, iy] : pairs_) out.pairs_.emplace_back(iy, ix);
  return out;
}

Eigen::Vector3d forward_kinematics(const PendulumConfig& config, const JointAngles& angles) {
  config.validate();
  const JointAngles a = angles.normalized();
  const Eigen::Matrix3d limb1 = rotation_zy(a.theta1z, a.theta1y);
  const Eigen::Matrix3d limb2 = limb1 * rotation_zy(a.theta2z, a.theta2y);
  const Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  return config.l1 * (limb1 * axis) + config.l2 * (limb2 * axis);
}

Feature feature_vector(const PendulumConfig& config, const JointAngles& angles) {
  const JointAngles a = angles.normalized();
  const Eigen::Vector3d e = forward_kinematics(config, a);
  Feature f;
  f << e.x(), e.y(), e.z(), std::cos(a.theta1y * kDegToRad), std::cos(a.theta1z * kDegToRad),
      std::cos(a.theta2y * kDegToRad), std::cos(a.theta2z * kDegToRad),
      std::sin(a.theta1z * kDegToRad), std::sin(a.theta1y * kDegToRad),
      std::sin(a.theta2y * kDegToRad), std::sin(a.theta2z * kDegToRad);
  return f;
}

JointAngles grid_angles_at(Eigen::Index index, int step_degrees) {
  check_step(step_degrees);
  const Eigen::Index m = 360 / step_degrees;
  const double step = step_degrees;
  return {static_cast<double>((index / (m * m * m)) % m) * step,
          static_cast<double>((index / (m * m)) % m) * step,
          static_cast<double>((index / m) % m) * step, static_cast<double>(index % m) * step};
}

Dataset generate_dataset(const PendulumConfig& config, int step_degrees) {
  config.validate();
  check_step(step_degrees);
  const Eigen::Index m = 360 / step_degrees;
  const Eigen::Index n = m * m * m * m;
  std::vector<JointAngles> angles(static_cast<std::size_t>(n));
  Eigen::MatrixXd features(n, kFeatureDim);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t row) {
    const auto r = static_cast<Eigen::Index>(row);
    angles[row] = grid_angles_at(r, step_degrees);
    features.row(r) = feature_vector(config, angles[row]).transpose();
  });
  auto grid = angles;
  return Dataset(config, step_degrees, std::move(grid), std::move(angles), std::move(features));
}

CorrespondenceSet select_correspondences(const Dataset& x, const Dataset& y,
                                         int corr_step_degrees) {
  check_step(corr_step_degrees);
  if (corr_step_degrees % x.grid_step() != 0 || corr_step_degrees % y.grid_step() != 0) {
    throw InvalidArgument("correspondence step " + std::to_string(corr_step_degrees) +
                          " must be a multiple of both grid steps (" +
                          std::to_string(x.grid_step()) + ", " + std::to_string(y.grid_step()) +
                          ")");
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const JointAngles& a = x.grid_angles()[static_cast<std::size_t>(i)];
    if (!on_grid(a, corr_step_degrees)) continue;
    const Eigen::Index j = grid_index_of(a, y.grid_step());
    if (j >= y.size() || !(y.grid_angles()[static_cast<std::size_t>(j)] == a)) {
      throw InvalidArgument("dataset Y is not a complete angle grid");
    }
    pairs.emplace_back(i, j);
  }
  return CorrespondenceSet(std::move(pairs), x.size(), y.size());
}

CorrespondenceSet grid_pairing(const Dataset& x, const Dataset& y) {
  return select_correspondences(x, y, std::lcm(x.grid_step(), y.grid_step()));
}

Dataset add_joint_noise(const Dataset& ds, double range_degrees, std::uint64_t seed) {
  check_range(range_degrees);
  if (range_degrees == 0.0) return ds;
  const auto n = static_cast<std::size_t>(ds.size());
  std::vector<JointAngles> perturbed(n);
  Eigen::MatrixXd features(ds.size(), kFeatureDim);
  parallel_for(n, [&](std::size_t row) {
    auto gen = row_stream(seed, static_cast<Eigen::Index>(row), 0x6a6f696e);
    JointAngles a = ds.angles()[row];
    a.theta1y += symmetric_uniform(gen, range_degrees);
    a.theta1z += symmetric_uniform(gen, range_degrees);
    a.theta2y += symmetric_uniform(gen, range_degrees);
    a.theta2z += symmetric_uniform(gen, range_degrees);
    perturbed[row] = a.normalized();
    features.row(static_cast<Eigen::Index>(row)) =
        feature_vector(ds.config(), perturbed[row]).transpose();
  });
  auto noise = ds.noise();
  noise.push_back({NoiseType::joint, range_degrees, seed});
  return Dataset(ds.config(), ds.grid_step(), ds.grid_angles(), std::move(perturbed),
                 std::move(features), std::move(noise));
}

Dataset add_coordinate_noise(const Dataset& ds, double range, std::uint64_t seed) {
  check_range(range);
  if (range == 0.0) return ds;
  Eigen::MatrixXd features = ds.features();
  parallel_for(static_cast<std::size_t>(ds.size()), [&](std::size_t row) {
    auto gen = row_stream(seed, static_cast<Eigen::Index>(row), 0x636f6f72);
    for (int c = 0; c < 3; ++c) {
      features(static_cast<Eigen::Index>(row), c) += symmetric_uniform(gen, range);
    }
  });
  auto noise = ds.noise();
  noise.push_back({NoiseType::coordinate, range, seed});
  return Dataset(ds.config(), ds.grid_step(), ds.grid_angles(), ds.angles(), std::move(features),
                 std::move(noise));
}

Dataset add_noise(const Dataset& ds, NoiseType type, double range, std::uint64_t seed) {
  return type == NoiseType::joint ? add_joint_noise(ds, range, seed)
                                  : add_coordinate_noise(ds, range, seed);
}

}  // namespace manifold_align
