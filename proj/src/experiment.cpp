#include "manifold_align/experiment.hpp"

#include "manifold_align/error.hpp"
#include "manifold_align/io.hpp"
#include "manifold_align/parallel.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <thread>

namespace manifold_align {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kNoiseSeedOffsetY = 0x9E3779B97F4A7C15ull;

Json pendulum_json(const PendulumConfig& p) { return Json{{"l1", p.l1}, {"l2", p.l2}}; }

PendulumConfig pendulum_from(const Json& j) {
  PendulumConfig p;
  p.l1 = j.at("l1").get<double>();
  p.l2 = j.at("l2").get<double>();
  return p;
}

double default_noise_max(NoiseType type) { return type == NoiseType::joint ? 10.0 : 1.0; }

// Commas would split the status cell of the metrics CSV.
std::string csv_safe(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

struct Evaluated {
  AlignmentResult result;
  Metrics metrics;
};

Evaluated evaluate(const ExperimentConfig& config, const ExperimentData& data, Method method,
                   Level level, std::optional<NoiseType> noise, double noise_range,
                   std::uint64_t seed, const std::string& noise_tag) {
  Dataset x = data.x;
  Dataset y = data.y;
  if (noise && noise_range > 0.0) {
    if (config.noise_target != NoiseTarget::y) x = add_noise(data.x, *noise, noise_range, seed);
    if (config.noise_target != NoiseTarget::x) {
      y = add_noise(data.y, *noise, noise_range, seed + kNoiseSeedOffsetY);
    }
  }
  AlignmentResult result = align(x, y, data.corr, method, level, config.align);
  const CorrespondenceSet pairing =
      config.eval_pairing == EvalPairing::grid ? grid_pairing(data.x, data.y) : data.corr;
  DenominatorOptions denom;
  denom.exact = config.exact_denominator;
  denom.seed = seed;
  const NormalizedDistances nd = normalized_distances(result.sx, result.sy, pairing, denom);
  MetricTags tags{to_string(method), to_string(level), noise_tag, noise_range, seed,
                  static_cast<Eigen::Index>(config.align.d)};
  Metrics metrics = summarize(nd.values, result.elapsed, tags, config.sample_std);
  return {std::move(result), std::move(metrics)};
}

std::string noise_tag_for(std::optional<NoiseType> noise) {
  return noise ? to_string(*noise) : std::string("none");
}

}  // namespace

std::string to_string(NoiseTarget target) {
  switch (target) {
    case NoiseTarget::both: return "both";
    case NoiseTarget::x: return "x";
    case NoiseTarget::y: return "y";
  }
  return "both";
}

NoiseTarget parse_noise_target(const std::string& name) {
  if (name == "both") return NoiseTarget::both;
  if (name == "x") return NoiseTarget::x;
  if (name == "y") return NoiseTarget::y;
  throw InvalidArgument("unknown noise target '" + name + "' (expected both|x|y)");
}

std::string to_string(EvalPairing pairing) {
  return pairing == EvalPairing::grid ? "grid" : "training";
}

EvalPairing parse_eval_pairing(const std::string& name) {
  if (name == "grid") return EvalPairing::grid;
  if (name == "training") return EvalPairing::training;
  throw InvalidArgument("unknown evaluation pairing '" + name + "' (expected grid|training)");
}

void ExperimentConfig::validate() const {
  pendulum1.validate();
  pendulum2.validate();
  auto divides = [](int step) { return step > 0 && 360 % step == 0; };
  if (!divides(grid_step)) throw InvalidArgument("grid step must divide 360");
  if (!divides(corr_step)) throw InvalidArgument("correspondence step must divide 360");
  if (corr_step % grid_step != 0) {
    throw InvalidArgument("correspondence step must be a multiple of the grid step");
  }
  if (methods.empty()) throw InvalidArgument("no methods selected");
  if (levels.empty()) throw InvalidArgument("no levels selected");
  if (noise_types.empty()) throw InvalidArgument("no noise types selected");
  if (align.d < 1) throw InvalidArgument("d must be >= 1");
  if (align.k < 1) throw InvalidArgument("k must be >= 1");
  if (!(align.mu >= 0.0)) throw InvalidArgument("mu must be >= 0");
  if (align.t && !(*align.t > 0.0)) throw InvalidArgument("t must be > 0 or auto");
  if (noise_max && !(*noise_max >= 0.0)) throw InvalidArgument("noise max must be >= 0");
  if (!(noise_level >= 0.0)) throw InvalidArgument("noise level must be >= 0");
  if (noise_steps < 1) throw InvalidArgument("noise steps must be >= 1");
  if (repeats < 1) throw InvalidArgument("repeats must be >= 1");
  if (workers < 0) throw InvalidArgument("workers must be >= 0");
}

std::vector<double> ExperimentConfig::noise_levels(NoiseType type) const {
  const double max = noise_max.value_or(default_noise_max(type));
  std::vector<double> levels;
  for (int l = 0; l <= noise_steps; ++l) levels.push_back(max * l / noise_steps);
  return levels;
}

std::string config_to_json(const ExperimentConfig& c) {
  Json j;
  j["pendulum1"] = pendulum_json(c.pendulum1);
  j["pendulum2"] = pendulum_json(c.pendulum2);
  j["grid_step"] = c.grid_step;
  j["corr_step"] = c.corr_step;
  j["methods"] = Json::array();
  for (Method m : c.methods) j["methods"].push_back(to_string(m));
  j["levels"] = Json::array();
  for (Level l : c.levels) j["levels"].push_back(to_string(l));
  j["d"] = c.align.d;
  j["k"] = c.align.k;
  j["t"] = c.align.t ? Json(*c.align.t) : Json("auto");
  j["mu"] = c.align.mu;
  j["distance_mode"] = to_string(c.align.distance_mode);
  j["procrustes_scale"] = c.align.procrustes_scale;
  j["repair_graphs"] = c.align.repair_graphs;
  j["noise_types"] = Json::array();
  for (NoiseType n : c.noise_types) j["noise_types"].push_back(to_string(n));
  j["noise_max"] = c.noise_max ? Json(*c.noise_max) : Json(nullptr);
  j["noise_steps"] = c.noise_steps;
  j["noise_level"] = c.noise_level;
  j["noise_target"] = to_string(c.noise_target);
  j["repeats"] = c.repeats;
  j["seed"] = c.seed;
  j["out"] = c.out.string();
  j["exact_denominator"] = c.exact_denominator;
  j["sample_std"] = c.sample_std;
  j["eval_pairing"] = to_string(c.eval_pairing);
  j["full"] = c.full;
  j["workers"] = c.workers;
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidArgument("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "pendulum1") c.pendulum1 = pendulum_from(value);
      else if (key == "pendulum2") c.pendulum2 = pendulum_from(value);
      else if (key == "grid_step") c.grid_step = value.get<int>();
      else if (key == "corr_step") c.corr_step = value.get<int>();
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& m : value) c.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "levels") {
        c.levels.clear();
        for (const auto& l : value) c.levels.push_back(parse_level(l.get<std::string>()));
      } else if (key == "d") c.align.d = value.get<int>();
      else if (key == "k") c.align.k = value.get<int>();
      else if (key == "t") {
        if (value.is_string()) {
          if (value.get<std::string>() != "auto") throw InvalidArgument("t must be a number or \"auto\"");
          c.align.t.reset();
        } else {
          c.align.t = value.get<double>();
        }
      } else if (key == "mu") c.align.mu = value.get<double>();
      else if (key == "distance_mode") c.align.distance_mode = parse_distance_mode(value.get<std::string>());
      else if (key == "procrustes_scale") c.align.procrustes_scale = value.get<bool>();
      else if (key == "repair_graphs") c.align.repair_graphs = value.get<bool>();
      else if (key == "noise_types") {
        c.noise_types.clear();
        for (const auto& n : value) c.noise_types.push_back(parse_noise_type(n.get<std::string>()));
      } else if (key == "noise_max") {
        if (value.is_null()) c.noise_max.reset();
        else c.noise_max = value.get<double>();
      } else if (key == "noise_steps") c.noise_steps = value.get<int>();
      else if (key == "noise_level") c.noise_level = value.get<double>();
      else if (key == "noise_target") c.noise_target = parse_noise_target(value.get<std::string>());
      else if (key == "repeats") c.repeats = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "out") c.out = value.get<std::string>();
      else if (key == "exact_denominator") c.exact_denominator = value.get<bool>();
      else if (key == "sample_std") c.sample_std = value.get<bool>();
      else if (key == "eval_pairing") c.eval_pairing = parse_eval_pairing(value.get<std::string>());
      else if (key == "full") c.full = value.get<bool>();
      else if (key == "workers") c.workers = value.get<int>();
      else throw InvalidArgument("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("'" + path.string() + "' is not valid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("config")) return config_from_json(j["config"].dump());
  return config_from_json(text);
}

void write_manifest(const ExperimentConfig& config, const std::string& command) {
  Json manifest;
  manifest["command"] = command;
  manifest["version"] = MANIFOLD_ALIGN_VERSION;
  manifest["config"] = Json::parse(config_to_json(config));
  manifest["seeds"] = Json{{"base", config.seed},
                           {"noise_y_offset", kNoiseSeedOffsetY},
                           {"per_level", "base + level_index + repeat * level_count"}};
  write_text(config.out / "manifest.json", manifest.dump(2) + "\n");
}

ExperimentData generate_data(const ExperimentConfig& config) {
  config.validate();
  Dataset x = generate_dataset(config.pendulum1, config.grid_step);
  Dataset y = generate_dataset(config.pendulum2, config.grid_step);
  CorrespondenceSet corr = select_correspondences(x, y, config.corr_step);
  return {std::move(x), std::move(y), std::move(corr)};
}

std::uint64_t cell_seed(const ExperimentConfig& config, std::size_t level, int repeat) {
  return config.seed + level +
         static_cast<std::uint64_t>(repeat) * static_cast<std::uint64_t>(config.noise_steps + 1);
}

CellOutcome run_cell(const ExperimentConfig& config, const ExperimentData& data, Method method,
                     Level level, std::optional<NoiseType> noise, double noise_range,
                     std::uint64_t seed) {
  CellOutcome out;
  try {
    auto evaluated = evaluate(config, data, method, level, noise, noise_range, seed,
                              noise_tag_for(noise));
    out.result = std::move(evaluated.result);
    out.metrics = std::move(evaluated.metrics);
  } catch (const Error& e) {
    out.status = "error: " + csv_safe(e.what());
    out.metrics.method = to_string(method);
    out.metrics.level = to_string(level);
    out.metrics.noise_type = noise_tag_for(noise);
    out.metrics.noise_level = noise_range;
    out.metrics.seed = seed;
    out.metrics.delta = std::numeric_limits<double>::quiet_NaN();
    out.metrics.sigma = std::numeric_limits<double>::quiet_NaN();
    out.metrics.d = config.align.d;
  }
  return out;
}

void cmd_generate(const ExperimentConfig& config, std::ostream& log) {
  const ExperimentData data = generate_data(config);
  ensure_directory(config.out);
  write_dataset_csv(config.out / "pendulum1.csv", data.x);
  write_dataset_csv(config.out / "pendulum2.csv", data.y);
  write_correspondences_csv(config.out / "corr.csv", data.corr);
  write_manifest(config, "generate");
  log << "pendulum1.csv: " << data.x.size() << " rows x " << kFeatureDim << " features\n"
      << "pendulum2.csv: " << data.y.size() << " rows x " << kFeatureDim << " features\n"
      << "corr.csv: " << data.corr.size() << " pairs\n";
}

Metrics cmd_align(const ExperimentConfig& config, Method method, Level level, std::ostream& log,
                  const std::optional<std::filesystem::path>& input_dir) {
  config.validate();
  ExperimentData data = [&] {
    if (!input_dir) return generate_data(config);
    Dataset x = read_dataset_csv(*input_dir / "pendulum1.csv", config.pendulum1);
    Dataset y = read_dataset_csv(*input_dir / "pendulum2.csv", config.pendulum2);
    CorrespondenceSet corr = read_correspondences_csv(*input_dir / "corr.csv", x.size(), y.size());
    return ExperimentData{std::move(x), std::move(y), std::move(corr)};
  }();

  // A single explicitly chosen noise type is recorded even at level 0, so the
  // row lines up with the zero-noise row of a sweep.
  std::optional<NoiseType> noise;
  if (config.noise_level > 0.0 || config.noise_types.size() == 1) noise = config.noise_types.front();
  auto evaluated = evaluate(config, data, method, level, noise, config.noise_level, config.seed,
                            noise_tag_for(noise));

  ensure_directory(config.out);
  const auto stem = "embedding_" + to_string(method) + "_" + to_string(level);
  write_embedding_csv(config.out / (stem + ".csv"), evaluated.result);
  write_correspondences_csv(config.out / "corr_pairs.csv", data.corr);
  append_metrics_csv(config.out / "metrics.csv", {metrics_row(evaluated.metrics)});
  write_manifest(config, "align");

  const Metrics& m = evaluated.metrics;
  log << to_string(method) << " (" << to_string(level) << "): delta = " << format_double(m.delta)
      << ", sigma = " << format_double(m.sigma) << ", elapsed = " << m.elapsed << " s"
      << ", effective rank X/Y = " << evaluated.result.rank_x() << "/"
      << evaluated.result.rank_y() << "\n";
  return m;
}

std::size_t cmd_sweep(const ExperimentConfig& config, std::ostream& log) {
  const ExperimentData data = generate_data(config);

  struct Cell {
    NoiseType noise;
    std::size_t level_index;
    double range;
    int repeat;
    Method method;
    Level level;
  };
  std::vector<Cell> cells;
  for (NoiseType noise : config.noise_types) {
    const auto ranges = config.noise_levels(noise);
    for (std::size_t l = 0; l < ranges.size(); ++l) {
      for (int r = 0; r < config.repeats; ++r) {
        for (Method m : config.methods) {
          for (Level lv : config.levels) cells.push_back({noise, l, ranges[l], r, m, lv});
        }
      }
    }
  }

  const std::size_t pool =
      config.workers > 0 ? static_cast<std::size_t>(config.workers)
                         : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t inner_workers = worker_count();
  if (pool > 1) set_worker_count(1);
  std::vector<CellOutcome> outcomes(cells.size());
  try {
    parallel_for(
        cells.size(),
        [&](std::size_t i) {
          const Cell& c = cells[i];
          outcomes[i] = run_cell(config, data, c.method, c.level, c.noise, c.range,
                                 cell_seed(config, c.level_index, c.repeat));
          outcomes[i].result.reset();
        },
        pool);
  } catch (...) {
    set_worker_count(inner_workers);
    throw;
  }
  set_worker_count(inner_workers);

  ensure_directory(config.out);
  std::vector<std::string> rows;
  rows.reserve(outcomes.size());
  std::size_t failures = 0;
  for (const auto& o : outcomes) {
    rows.push_back(metrics_row(o.metrics, o.status));
    if (o.status != "ok") ++failures;
  }
  append_metrics_csv(config.out / "metrics.csv", rows);

  // Mean over repeats per (noise type, range, method, level): plot data for
  // delta against noise range with sigma error bars.
  struct Accum {
    double delta = 0.0;
    double sigma = 0.0;
    int count = 0;
  };
  std::vector<std::tuple<std::string, double, std::string, std::string>> keys;
  std::map<std::tuple<std::string, double, std::string, std::string>, Accum> summary;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto key = std::make_tuple(to_string(cells[i].noise), cells[i].range,
                                     to_string(cells[i].method), to_string(cells[i].level));
    auto [it, inserted] = summary.try_emplace(key);
    if (inserted) keys.push_back(key);
    if (outcomes[i].status == "ok") {
      it->second.delta += outcomes[i].metrics.delta;
      it->second.sigma += outcomes[i].metrics.sigma;
      ++it->second.count;
    }
  }
  std::string text = "noise_type,noise_level,method,level,delta,sigma,runs\n";
  for (const auto& key : keys) {
    const Accum& a = summary.at(key);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    text += std::get<0>(key) + "," + format_double(std::get<1>(key)) + "," + std::get<2>(key) + "," +
            std::get<3>(key) + "," + format_double(a.count ? a.delta / a.count : nan) + "," +
            format_double(a.count ? a.sigma / a.count : nan) + "," + std::to_string(a.count) + "\n";
  }
  write_text(config.out / "summary.csv", text);
  write_manifest(config, "sweep");
  log << "sweep: " << rows.size() << " metrics rows (" << failures << " failed) -> "
      << (config.out / "metrics.csv").string() << "\n";
  return rows.size();
}

ExportFormat parse_export_format(const std::string& name) {
  if (name == "csv") return ExportFormat::csv;
  if (name == "ply") return ExportFormat::ply;
  throw InvalidArgument("unknown export format '" + name + "' (expected csv|ply)");
}

std::pair<Eigen::Index, Eigen::Index> cmd_export(const ExportOptions& options, std::ostream& log) {
  const EmbeddingTable table = read_embedding_csv(options.embedding);
  const bool filtering = options.limb1_step > 0 || options.limb2_step > 0;
  int grid_step = 0;
  if (filtering) {
    if (options.grid_step) {
      grid_step = *options.grid_step;
    } else {
      const auto manifest = options.embedding.parent_path() / "manifest.json";
      if (!std::filesystem::exists(manifest)) {
        throw InvalidArgument("angle filters need --grid-step or a manifest.json beside the embedding");
      }
      grid_step = load_config(manifest).grid_step;
    }
  }
  auto keep = [&](Eigen::Index index) {
    if (!filtering) return true;
    const JointAngles a = grid_angles_at(index, grid_step);
    auto multiple = [](double angle, int step) { return step <= 0 || std::lround(angle) % step == 0; };
    return multiple(a.theta1y, options.limb1_step) && multiple(a.theta1z, options.limb1_step) &&
           multiple(a.theta2y, options.limb2_step) && multiple(a.theta2z, options.limb2_step);
  };

  const auto out_dir = options.out.empty() ? options.embedding.parent_path() : options.out;
  const std::string stem = options.embedding.stem().string();
  std::pair<Eigen::Index, Eigen::Index> counts{0, 0};
  for (char side : {'X', 'Y'}) {
    const EmbeddingTable all = table.select(side);
    EmbeddingTable kept;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < all.coords.rows(); ++r) {
      if (keep(all.index[static_cast<std::size_t>(r)])) rows.push_back(r);
    }
    kept.coords.resize(static_cast<Eigen::Index>(rows.size()), all.coords.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      kept.coords.row(static_cast<Eigen::Index>(k)) = all.coords.row(rows[k]);
      kept.index.push_back(all.index[static_cast<std::size_t>(rows[k])]);
      kept.side.push_back(side);
    }
    const std::string name = stem + "_" + side;
    if (options.format == ExportFormat::ply) {
      write_ply(out_dir / (name + ".ply"), kept.coords);
    } else {
      write_embedding_table_csv(out_dir / (name + ".csv"), kept);
    }
    (side == 'X' ? counts.first : counts.second) = kept.coords.rows();
    log << name << ": " << kept.coords.rows() << " points\n";
  }
  return counts;
}

}  // namespace manifold_align
