#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace manifold_align {

/// Limb lengths of one three-dimensional double pendulum. Only the l2 < l1
/// case is supported.
struct PendulumConfig {
  double l1 = 1.25;
  double l2 = 0.75;

  /// Throws InvalidArgument unless 0 < l2 < l1.
  void validate() const;
  double ratio() const { return l2 / l1; }

  static PendulumConfig pendulum1() { return {1.25, 0.75}; }
  static PendulumConfig pendulum2() { return {1.56, 1.25}; }
};

/// Four joint angles in degrees. theta2y / theta2z are measured in the
/// rotated local frame of the first limb.
struct JointAngles {
  double theta1y = 0.0;
  double theta1z = 0.0;
  double theta2y = 0.0;
  double theta2z = 0.0;

  /// Same pose with every angle wrapped into [0, 360).
  JointAngles normalized() const;

  friend bool operator==(const JointAngles&, const JointAngles&) = default;
};

inline constexpr int kFeatureDim = 11;
using Feature = Eigen::Matrix<double, kFeatureDim, 1>;

/// Layout: e_x, e_y, e_z, cos t1y, cos t1z, cos t2y, cos t2z,
///         sin t1z, sin t1y, sin t2y, sin t2z.
/// The sine block lists t1z before t1y.
struct Sample {
  JointAngles angles;
  Feature feature;
};

enum class NoiseType { joint, coordinate };

std::string to_string(NoiseType type);
NoiseType parse_noise_type(const std::string& name);

struct NoiseRecord {
  NoiseType type;
  double range;
  std::uint64_t seed;
};

/// An n x 11 feature matrix sampled from a regular angle grid.
///
/// Rows are ordered lexicographically by (theta1y, theta1z, theta2y, theta2z).
/// `grid_angles()` always holds the noise-free grid pose of each row, which
/// is what correspondences and evaluation pairings are defined on.
/// `angles()` holds the pose actually used to compute the features (differs
/// from the grid pose only after joint noise).
class Dataset {
public:
  Dataset(PendulumConfig config, int grid_step, std::vector<JointAngles> grid_angles,
          std::vector<JointAngles> angles, Eigen::MatrixXd features,
          std::vector<NoiseRecord> noise = {});

  const PendulumConfig& config() const { return config_; }
  int grid_step() const { return grid_step_; }
  Eigen::Index size() const { return features_.rows(); }
  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<JointAngles>& grid_angles() const { return grid_angles_; }
  const std::vector<JointAngles>& angles() const { return angles_; }
  const std::vector<NoiseRecord>& noise() const { return noise_; }
  bool noise_free() const { return noise_.empty(); }

  Sample sample(Eigen::Index row) const;

private:
  PendulumConfig config_;
  int grid_step_;
  std::vector<JointAngles> grid_angles_;
  std::vector<JointAngles> angles_;
  Eigen::MatrixXd features_;
  std::vector<NoiseRecord> noise_;
};

/// Ordered (row in X, row in Y) pairs of known-matching instances.
class CorrespondenceSet {
public:
  CorrespondenceSet() = default;
  /// Throws InvalidArgument on duplicate indices per side or indices outside
  /// [0, nx) / [0, ny).
  CorrespondenceSet(std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs, Eigen::Index nx,
                    Eigen::Index ny);

  static CorrespondenceSet identity(Eigen::Index n);

  const std::vector<std::pair<Eigen::Index, Eigen::Index>>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  /// The same pairs with the roles of X and Y exchanged.
  CorrespondenceSet swapped() const;

private:
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs_;
};

/// End-effector position. Limb 1 points along Rz(t1z) Ry(t1y) x-hat; limb 2
/// along R1 Rz(t2z) Ry(t2y) x-hat where R1 is the limb-1 rotation.
Eigen::Vector3d forward_kinematics(const PendulumConfig& config, const JointAngles& angles);

Feature feature_vector(const PendulumConfig& config, const JointAngles& angles);

/// Grid pose of row `index` for a grid with the given step.
JointAngles grid_angles_at(Eigen::Index index, int step_degrees);

/// All (360/step)^4 poses of the grid. step must divide 360.
Dataset generate_dataset(const PendulumConfig& config, int step_degrees);

/// Pairs rows of X and Y whose grid poses coincide and lie on the corr_step
/// grid. corr_step must be a multiple of both grid steps.
CorrespondenceSet select_correspondences(const Dataset& x, const Dataset& y, int corr_step_degrees);

/// The full one-to-one pairing of all common grid poses of X and Y.
CorrespondenceSet grid_pairing(const Dataset& x, const Dataset& y);

/// Perturbs each angle of each row by U(-range, range) degrees and recomputes
/// the whole feature vector. Row r draws from a generator seeded with
/// (seed, r), so results do not depend on evaluation order.
Dataset add_joint_noise(const Dataset& ds, double range_degrees, std::uint64_t seed);

/// Perturbs only e_x, e_y, e_z of each row by U(-range, range).
Dataset add_coordinate_noise(const Dataset& ds, double range, std::uint64_t seed);

/// Dispatches to add_joint_noise / add_coordinate_noise.
Dataset add_noise(const Dataset& ds, NoiseType type, double range, std::uint64_t seed);

}  // namespace manifold_align
