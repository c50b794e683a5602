// Command-line front end: generate, align, sweep, export.

#include "manifold_align/error.hpp"
#include "manifold_align/experiment.hpp"
#include "manifold_align/parallel.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace ma = manifold_align;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kIo = 3 };

struct Flags {
  std::string config;
  int grid_step = 0;
  int corr_step = 0;
  std::string method;
  std::string level;
  int d = 0;
  int k = 0;
  double mu = 0.0;
  std::string t;
  std::string noise_type;
  double noise_max = 0.0;
  int noise_steps = 0;
  double noise_level = 0.0;
  std::string noise_target;
  int repeats = 0;
  std::uint64_t seed = 0;
  std::string out;
  bool exact_denominator = false;
  bool sample_std = false;
  std::string eval_pairing;
  std::string distance_mode;
  bool no_procrustes_scale = false;
  bool repair_graphs = false;
  bool full = false;
  int workers = 0;
  std::string input;

  std::string embedding;
  std::string format = "csv";
  int limb1_step = 0;
  int limb2_step = 0;
};

// Options whose presence overrides the config file.
struct Seen {
  CLI::Option* config{};
  CLI::Option* grid_step{};
  CLI::Option* corr_step{};
  CLI::Option* method{};
  CLI::Option* level{};
  CLI::Option* d{};
  CLI::Option* k{};
  CLI::Option* mu{};
  CLI::Option* t{};
  CLI::Option* noise_type{};
  CLI::Option* noise_max{};
  CLI::Option* noise_steps{};
  CLI::Option* noise_level{};
  CLI::Option* noise_target{};
  CLI::Option* repeats{};
  CLI::Option* seed{};
  CLI::Option* out{};
  CLI::Option* exact_denominator{};
  CLI::Option* sample_std{};
  CLI::Option* eval_pairing{};
  CLI::Option* distance_mode{};
  CLI::Option* no_procrustes_scale{};
  CLI::Option* repair_graphs{};
  CLI::Option* full{};
  CLI::Option* workers{};
};

Seen add_experiment_flags(CLI::App* cmd, Flags& f) {
  Seen s;
  s.config = cmd->add_option("--config", f.config, "JSON config or manifest to start from");
  s.grid_step = cmd->add_option("--grid-step", f.grid_step, "Angle grid step in degrees (default 60)");
  s.corr_step = cmd->add_option("--corr-step", f.corr_step, "Correspondence grid step (default 120)");
  s.method = cmd->add_option("--method", f.method,
                             "procrustes|local_laplacian|local_weights|global_distance|all");
  s.level = cmd->add_option("--level", f.level, "instance|feature|all");
  s.d = cmd->add_option("--d", f.d, "Embedding dimension (default 3)");
  s.k = cmd->add_option("--k", f.k, "Nearest neighbours per point (default 8)");
  s.mu = cmd->add_option("--mu", f.mu, "Correspondence coupling weight (default 100)");
  s.t = cmd->add_option("--t", f.t, "Heat kernel width, number or 'auto'");
  s.noise_type = cmd->add_option("--noise-type", f.noise_type, "joint|coordinate|all");
  s.noise_max = cmd->add_option("--noise-max", f.noise_max,
                                "Largest noise range (default 10 deg joint, 1.0 coordinate)");
  s.noise_steps = cmd->add_option("--noise-steps", f.noise_steps, "Noise increments (default 10)");
  s.noise_level = cmd->add_option("--noise-level", f.noise_level, "Noise range for a single alignment");
  s.noise_target = cmd->add_option("--noise-target", f.noise_target, "both|x|y (default both)");
  s.repeats = cmd->add_option("--repeats", f.repeats, "Seeds per noise level (default 1)");
  s.seed = cmd->add_option("--seed", f.seed, "Base seed (falls back to MA_SEED, then 0)");
  s.out = cmd->add_option("--out", f.out, "Output directory (default out)");
  s.exact_denominator =
      cmd->add_flag("--exact-denominator", f.exact_denominator, "Never sample the width");
  s.sample_std = cmd->add_flag("--sample-std", f.sample_std, "Report sample (n-1) std for sigma");
  s.eval_pairing = cmd->add_option("--eval-pairing", f.eval_pairing, "grid|training (default grid)");
  s.distance_mode = cmd->add_option("--distance-mode", f.distance_mode, "geodesic|euclidean");
  s.no_procrustes_scale =
      cmd->add_flag("--no-procrustes-scale", f.no_procrustes_scale, "Rigid Procrustes fit");
  s.repair_graphs =
      cmd->add_flag("--repair-graphs", f.repair_graphs, "Link disconnected k-NN components");
  s.full = cmd->add_flag("--full", f.full, "Full-size grids (30/90 degrees); very expensive");
  s.workers = cmd->add_option("--workers", f.workers, "Worker threads (default core count)");
  return s;
}

std::vector<ma::Method> methods_from(const std::string& name) {
  if (name == "all") {
    return {ma::Method::procrustes, ma::Method::local_laplacian, ma::Method::local_weights,
            ma::Method::global_distance};
  }
  return {ma::parse_method(name)};
}

std::vector<ma::Level> levels_from(const std::string& name) {
  if (name == "all" || name == "both") return {ma::Level::instance, ma::Level::feature};
  return {ma::parse_level(name)};
}

ma::ExperimentConfig build_config(const Flags& f, const Seen& s) {
  ma::ExperimentConfig c;
  if (*s.config) c = ma::load_config(f.config);
  if (!*s.seed && !*s.config) {
    if (const char* env = std::getenv("MA_SEED")) {
      try {
        c.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw ma::InvalidArgument(std::string("MA_SEED is not an unsigned integer: ") + env);
      }
    }
  }
  if (*s.full && f.full) {
    c.full = true;
    c.grid_step = 30;
    c.corr_step = 90;
  }
  if (*s.grid_step) c.grid_step = f.grid_step;
  if (*s.corr_step) c.corr_step = f.corr_step;
  if (*s.method) c.methods = methods_from(f.method);
  if (*s.level) c.levels = levels_from(f.level);
  if (*s.d) c.align.d = f.d;
  if (*s.k) c.align.k = f.k;
  if (*s.mu) c.align.mu = f.mu;
  if (*s.t) {
    if (f.t == "auto") {
      c.align.t.reset();
    } else {
      try {
        c.align.t = std::stod(f.t);
      } catch (const std::exception&) {
        throw ma::InvalidArgument("--t must be a number or 'auto'");
      }
    }
  }
  if (*s.noise_type) {
    c.noise_types = f.noise_type == "all"
                        ? std::vector<ma::NoiseType>{ma::NoiseType::joint, ma::NoiseType::coordinate}
                        : std::vector<ma::NoiseType>{ma::parse_noise_type(f.noise_type)};
  }
  if (*s.noise_max) c.noise_max = f.noise_max;
  if (*s.noise_steps) c.noise_steps = f.noise_steps;
  if (*s.noise_level) c.noise_level = f.noise_level;
  if (*s.noise_target) c.noise_target = ma::parse_noise_target(f.noise_target);
  if (*s.repeats) c.repeats = f.repeats;
  if (*s.seed) c.seed = f.seed;
  if (*s.out) c.out = f.out;
  if (*s.exact_denominator) c.exact_denominator = f.exact_denominator;
  if (*s.sample_std) c.sample_std = f.sample_std;
  if (*s.eval_pairing) c.eval_pairing = ma::parse_eval_pairing(f.eval_pairing);
  if (*s.distance_mode) c.align.distance_mode = ma::parse_distance_mode(f.distance_mode);
  if (*s.no_procrustes_scale) c.align.procrustes_scale = !f.no_procrustes_scale;
  if (*s.repair_graphs) c.align.repair_graphs = f.repair_graphs;
  if (*s.workers) c.workers = f.workers;
  c.validate();
  if (c.workers > 0) ma::set_worker_count(static_cast<std::size_t>(c.workers));
  if (c.full) {
    std::cerr << "warning: full-size grids (" << c.grid_step
              << " degree steps) need tens of GB of memory and days of CPU time for the "
                 "global method\n";
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Manifold alignment of simulated 3-D double pendulum datasets"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MANIFOLD_ALIGN_VERSION));

  Flags f;
  auto* generate = app.add_subcommand("generate", "Write both pendulum datasets and correspondences");
  auto* align = app.add_subcommand("align", "Run one method at one level and record metrics");
  auto* sweep = app.add_subcommand("sweep", "Run the noise sweep over methods and levels");
  auto* exporter = app.add_subcommand("export", "Write point clouds from an embedding file");

  const Seen generate_seen = add_experiment_flags(generate, f);
  const Seen align_seen = add_experiment_flags(align, f);
  align->add_option("--input", f.input, "Directory holding pendulum1.csv, pendulum2.csv, corr.csv");
  const Seen sweep_seen = add_experiment_flags(sweep, f);

  exporter->add_option("--embedding", f.embedding, "Embedding CSV written by align")->required();
  exporter->add_option("--format", f.format, "csv|ply");
  exporter->add_option("--limb1-step", f.limb1_step, "Keep rows with limb-1 angles on this step");
  exporter->add_option("--limb2-step", f.limb2_step, "Keep rows with limb-2 angles on this step");
  auto* export_grid = exporter->add_option("--grid-step", f.grid_step, "Grid step of the datasets");
  exporter->add_option("--out", f.out, "Output directory (default: beside the embedding)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (generate->parsed()) {
      ma::cmd_generate(build_config(f, generate_seen), std::cout);
    } else if (align->parsed()) {
      const ma::ExperimentConfig config = build_config(f, align_seen);
      std::optional<std::filesystem::path> input;
      if (!f.input.empty()) input = f.input;
      ma::cmd_align(config, config.methods.front(), config.levels.front(), std::cout, input);
    } else if (sweep->parsed()) {
      ma::cmd_sweep(build_config(f, sweep_seen), std::cout);
    } else if (exporter->parsed()) {
      ma::ExportOptions options;
      options.embedding = f.embedding;
      options.format = ma::parse_export_format(f.format);
      options.limb1_step = f.limb1_step;
      options.limb2_step = f.limb2_step;
      if (*export_grid) options.grid_step = f.grid_step;
      options.out = f.out;
      ma::cmd_export(options, std::cout);
    }
  } catch (const ma::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ma::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ma::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
