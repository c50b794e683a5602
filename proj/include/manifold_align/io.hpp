#pragma once

#include "manifold_align/align.hpp"
#include "manifold_align/eval.hpp"
#include "manifold_align/graph.hpp"
#include "manifold_align/pendulum.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace manifold_align {

namespace fs = std::filesystem;

/// Shortest round-trip-safe text form: 17 significant digits.
std::string format_double(double value);

/// Creates the directory (and parents); throws IoError on failure.
void ensure_directory(const fs::path& dir);

/// Columns: index, theta1y, theta1z, theta2y, theta2z, f1..f11. The angle
/// columns hold the grid pose of each row.
void write_dataset_csv(const fs::path& path, const Dataset& ds);
/// Reads a file written by write_dataset_csv. The grid step is recovered from
/// the row count.
Dataset read_dataset_csv(const fs::path& path, const PendulumConfig& config);

/// Columns: ix, iy.
void write_correspondences_csv(const fs::path& path, const CorrespondenceSet& corr);
CorrespondenceSet read_correspondences_csv(const fs::path& path, Eigen::Index nx, Eigen::Index ny);

/// Columns: index, c1..cd, side. X rows first, then Y rows.
void write_embedding_csv(const fs::path& path, const AlignmentResult& result);

struct EmbeddingTable {
  std::vector<Eigen::Index> index;
  std::vector<char> side;
  Eigen::MatrixXd coords;

  /// Rows of one side, in file order.
  EmbeddingTable select(char which) const;
};

EmbeddingTable read_embedding_csv(const fs::path& path);

/// Columns: i, j, w (one line per undirected edge, i < j).
void write_graph_csv(const fs::path& path, const NeighborGraph& g);

/// ASCII PLY with x, y, z vertex properties (missing dimensions are 0, extra
/// dimensions are dropped).
void write_ply(const fs::path& path, const Eigen::MatrixXd& coords);

/// Writes only the chosen rows of a table as CSV (index, c1..cd, side).
void write_embedding_table_csv(const fs::path& path, const EmbeddingTable& table);

inline constexpr const char* kMetricsHeader =
    "method,level,noise_type,noise_level,seed,delta,sigma,elapsed_s,n,d,status";

/// One metrics CSV line (no trailing newline), matching kMetricsHeader.
std::string metrics_row(const Metrics& m, const std::string& status = "ok");

/// Appends rows, writing the header first if the file is new or empty.
void append_metrics_csv(const fs::path& path, const std::vector<std::string>& rows);

/// Reads a whole text file; throws IoError if it cannot be opened.
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace manifold_align
