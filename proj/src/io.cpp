#include "manifold_align/io.hpp"

#include "manifold_align/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace manifold_align {

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  if (path.has_parent_path()) ensure_directory(path.parent_path());
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& text, const fs::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed number '" + text + "' in '" + path.string() + "'");
  }
}

Eigen::Index parse_index(const std::string& text, const fs::path& path) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return static_cast<Eigen::Index>(v);
  } catch (const std::exception&) {
    throw IoError("malformed index '" + text + "' in '" + path.string() + "'");
  }
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

void ensure_directory(const fs::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create directory '" + dir.string() + "'");
  }
}

void write_dataset_csv(const fs::path& path, const Dataset& ds) {
  auto out = open_out(path);
  out << "index,theta1y,theta1z,theta2y,theta2z";
  for (int f = 1; f <= kFeatureDim; ++f) out << ",f" << f;
  out << '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const JointAngles& a = ds.grid_angles()[static_cast<std::size_t>(i)];
    out << i << ',' << format_double(a.theta1y) << ',' << format_double(a.theta1z) << ','
        << format_double(a.theta2y) << ',' << format_double(a.theta2z);
    for (int f = 0; f < kFeatureDim; ++f) out << ',' << format_double(ds.features()(i, f));
    out << '\n';
  }
  finish(out, path);
}

Dataset read_dataset_csv(const fs::path& path, const PendulumConfig& config) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("index,theta1y", 0) != 0) throw IoError("'" + path.string() + "' is not a dataset file");
  std::vector<JointAngles> angles;
  std::vector<Feature> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 5 + kFeatureDim) throw IoError("wrong column count in '" + path.string() + "'");
    if (parse_index(cells[0], path) != static_cast<Eigen::Index>(rows.size())) {
      throw IoError("rows out of order in '" + path.string() + "'");
    }
    angles.push_back({parse_double(cells[1], path), parse_double(cells[2], path),
                      parse_double(cells[3], path), parse_double(cells[4], path)});
    Feature f;
    for (int c = 0; c < kFeatureDim; ++c) f(c) = parse_double(cells[5 + static_cast<std::size_t>(c)], path);
    rows.push_back(f);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto per_axis = static_cast<long>(std::lround(std::pow(static_cast<double>(n), 0.25)));
  if (per_axis < 1 || per_axis * per_axis * per_axis * per_axis != n || 360 % per_axis != 0) {
    throw IoError("'" + path.string() + "' does not hold a complete angle grid");
  }
  const int step = static_cast<int>(360 / per_axis);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(grid_angles_at(i, step) == angles[static_cast<std::size_t>(i)])) {
      throw IoError("row " + std::to_string(i) + " of '" + path.string() + "' is off the grid");
    }
  }
  Eigen::MatrixXd features(n, kFeatureDim);
  for (Eigen::Index i = 0; i < n; ++i) features.row(i) = rows[static_cast<std::size_t>(i)].transpose();
  auto pose = angles;
  return Dataset(config, step, std::move(angles), std::move(pose), std::move(features));
}

void write_correspondences_csv(const fs::path& path, const CorrespondenceSet& corr) {
  auto out = open_out(path);
  out << "ix,iy\n";
  for (const auto& [ix, iy] : corr.pairs()) out << ix << ',' << iy << '\n';
  finish(out, path);
}

CorrespondenceSet read_correspondences_csv(const fs::path& path, Eigen::Index nx, Eigen::Index ny) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  if (line != "ix,iy") throw IoError("'" + path.string() + "' is not a correspondence file");
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw IoError("wrong column count in '" + path.string() + "'");
    pairs.emplace_back(parse_index(cells[0], path), parse_index(cells[1], path));
  }
  return CorrespondenceSet(std::move(pairs), nx, ny);
}

void write_embedding_csv(const fs::path& path, const AlignmentResult& result) {
  EmbeddingTable table;
  const Eigen::Index nx = result.sx.size();
  const Eigen::Index ny = result.sy.size();
  table.coords.resize(nx + ny, result.sx.dim());
  table.coords.topRows(nx) = result.sx.coords();
  table.coords.bottomRows(ny) = result.sy.coords();
  for (Eigen::Index i = 0; i < nx; ++i) {
    table.index.push_back(i);
    table.side.push_back('X');
  }
  for (Eigen::Index i = 0; i < ny; ++i) {
    table.index.push_back(i);
    table.side.push_back('Y');
  }
  write_embedding_table_csv(path, table);
}

void write_embedding_table_csv(const fs::path& path, const EmbeddingTable& table) {
  auto out = open_out(path);
  out << "index";
  for (Eigen::Index c = 1; c <= table.coords.cols(); ++c) out << ",c" << c;
  out << ",side\n";
  for (Eigen::Index r = 0; r < table.coords.rows(); ++r) {
    out << table.index[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < table.coords.cols(); ++c) out << ',' << format_double(table.coords(r, c));
    out << ',' << table.side[static_cast<std::size_t>(r)] << '\n';
  }
  finish(out, path);
}

EmbeddingTable EmbeddingTable::select(char which) const {
  EmbeddingTable out;
  std::vector<Eigen::Index> rows;
  for (std::size_t r = 0; r < side.size(); ++r) {
    if (side[r] == which) rows.push_back(static_cast<Eigen::Index>(r));
  }
  out.coords.resize(static_cast<Eigen::Index>(rows.size()), coords.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.coords.row(static_cast<Eigen::Index>(k)) = coords.row(rows[k]);
    out.index.push_back(index[static_cast<std::size_t>(rows[k])]);
    out.side.push_back(which);
  }
  return out;
}

EmbeddingTable read_embedding_csv(const fs::path& path) {
  auto in = open_in(path);
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  if (header.size() < 3 || header.front() != "index" || header.back() != "side") {
    throw IoError("'" + path.string() + "' is not an embedding file");
  }
  const auto d = static_cast<Eigen::Index>(header.size() - 2);
  EmbeddingTable table;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw IoError("wrong column count in '" + path.string() + "'");
    table.index.push_back(parse_index(cells.front(), path));
    for (Eigen::Index c = 0; c < d; ++c) values.push_back(parse_double(cells[static_cast<std::size_t>(c) + 1], path));
    if (cells.back() != "X" && cells.back() != "Y") throw IoError("side must be X or Y in '" + path.string() + "'");
    table.side.push_back(cells.back()[0]);
  }
  const auto n = static_cast<Eigen::Index>(table.index.size());
  table.coords = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), n, d);
  return table;
}

void write_graph_csv(const fs::path& path, const NeighborGraph& g) {
  auto out = open_out(path);
  out << "i,j,w\n";
  for (const auto& e : g.edges()) out << e.row() << ',' << e.col() << ',' << format_double(e.value()) << '\n';
  finish(out, path);
}

void write_ply(const fs::path& path, const Eigen::MatrixXd& coords) {
  auto out = open_out(path);
  out << "ply\nformat ascii 1.0\nelement vertex " << coords.rows()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (Eigen::Index r = 0; r < coords.rows(); ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      out << (c ? " " : "") << format_double(c < coords.cols() ? coords(r, c) : 0.0);
    }
    out << '\n';
  }
  finish(out, path);
}

std::string metrics_row(const Metrics& m, const std::string& status) {
  std::ostringstream row;
  row << m.method << ',' << m.level << ',' << m.noise_type << ',' << format_double(m.noise_level) << ','
      << m.seed << ',' << format_double(m.delta) << ',' << format_double(m.sigma) << ','
      << format_double(m.elapsed) << ',' << m.n << ',' << m.d << ',' << status;
  return row.str();
}

void append_metrics_csv(const fs::path& path, const std::vector<std::string>& rows) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  auto out = open_out(path, std::ios::app);
  if (fresh) out << kMetricsHeader << '\n';
  for (const auto& r : rows) out << r << '\n';
  finish(out, path);
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

}  // namespace manifold_align
