#pragma once

#include "manifold_align/align.hpp"
#include "manifold_align/eval.hpp"
#include "manifold_align/pendulum.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace manifold_align {

enum class NoiseTarget { both, x, y };
enum class EvalPairing { grid, training };

std::string to_string(NoiseTarget target);
NoiseTarget parse_noise_target(const std::string& name);
std::string to_string(EvalPairing pairing);
EvalPairing parse_eval_pairing(const std::string& name);

/// Everything needed to rerun an experiment bit-for-bit (elapsed aside).
struct ExperimentConfig {
  PendulumConfig pendulum1 = PendulumConfig::pendulum1();
  PendulumConfig pendulum2 = PendulumConfig::pendulum2();
  int grid_step = 60;
  int corr_step = 120;
  std::vector<Method> methods = {Method::procrustes, Method::local_laplacian,
                                 Method::local_weights, Method::global_distance};
  std::vector<Level> levels = {Level::feature};
  AlignOptions align;

  /// Noise types swept by `sweep`; `align` applies noise only when
  /// noise_level > 0.
  std::vector<NoiseType> noise_types = {NoiseType::joint, NoiseType::coordinate};
  /// Largest noise range per type; empty means 10 degrees (joint) / 1.0
  /// (coordinate).
  std::optional<double> noise_max;
  int noise_steps = 10;
  /// Noise range applied by `align`.
  double noise_level = 0.0;
  NoiseTarget noise_target = NoiseTarget::both;
  int repeats = 1;

  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  bool exact_denominator = false;
  bool sample_std = false;
  EvalPairing eval_pairing = EvalPairing::grid;
  bool full = false;
  int workers = 0;

  /// Throws InvalidArgument on inconsistent settings.
  void validate() const;
  /// Noise ranges of the sweep for one type: 0, max/steps, ..., max.
  std::vector<double> noise_levels(NoiseType type) const;
};

/// JSON object with keys mirroring the long command-line flag names.
std::string config_to_json(const ExperimentConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);

/// Accepts a bare config object or a manifest (whose "config" member is used).
ExperimentConfig load_config(const std::filesystem::path& path);

/// Writes manifest.json into config.out: command, config, seeds, version.
void write_manifest(const ExperimentConfig& config, const std::string& command);

/// The two noise-free grid datasets and their training correspondences.
struct ExperimentData {
  Dataset x;
  Dataset y;
  CorrespondenceSet corr;
};

ExperimentData generate_data(const ExperimentConfig& config);

/// Seed used for noise level index `level` and repeat `repeat`.
std::uint64_t cell_seed(const ExperimentConfig& config, std::size_t level, int repeat);

struct CellOutcome {
  std::optional<AlignmentResult> result;
  Metrics metrics;
  std::string status = "ok";
};

/// Applies noise (if range > 0), aligns and evaluates one configuration.
/// Failures are captured in `status` instead of thrown.
CellOutcome run_cell(const ExperimentConfig& config, const ExperimentData& data, Method method,
                     Level level, std::optional<NoiseType> noise, double noise_range,
                     std::uint64_t seed);

/// Subcommand bodies. Progress and results go to `log`.
void cmd_generate(const ExperimentConfig& config, std::ostream& log);

/// Returns the metrics of the single alignment; rethrows library errors.
Metrics cmd_align(const ExperimentConfig& config, Method method, Level level, std::ostream& log,
                  const std::optional<std::filesystem::path>& input_dir = std::nullopt);

/// Returns the number of metrics rows written.
std::size_t cmd_sweep(const ExperimentConfig& config, std::ostream& log);

enum class ExportFormat { csv, ply };
ExportFormat parse_export_format(const std::string& name);

struct ExportOptions {
  std::filesystem::path embedding;
  ExportFormat format = ExportFormat::csv;
  /// Keep rows whose limb-1 angles are multiples of this step (0 = all).
  int limb1_step = 0;
  /// Keep rows whose limb-2 angles are multiples of this step (0 = all).
  int limb2_step = 0;
  /// Grid step of the embedded datasets; read from the manifest beside the
  /// embedding when absent.
  std::optional<int> grid_step;
  std::filesystem::path out;
};

/// Writes one point cloud per side; returns the row count written per side.
std::pair<Eigen::Index, Eigen::Index> cmd_export(const ExportOptions& options, std::ostream& log);

}  // namespace manifold_align
