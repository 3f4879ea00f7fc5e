// mcpr: generate synthetic mixed Bradley-Terry data, run the projected
// ranking pipeline on comparison files, and reproduce the desk-scale
// experiment tables.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "config.hpp"
#include "mcpr/experiments.hpp"
#include "mcpr/io.hpp"
#include "mcpr/netwin.hpp"
#include "mcpr/parallel.hpp"
#include "mcpr/pipeline.hpp"
#include "selfcheck.hpp"

namespace fs = std::filesystem;
using namespace mcpr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_config = true) {
  if (with_config) cmd->add_option("--config", flags.config_path, "config file (key = value)");
  cmd->add_option("--out", flags.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--threads", flags.threads, "worker threads");
  cmd->add_option("--format", flags.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
}

cli::RunConfig effective_config(const CommonFlags& flags) {
  cli::ConfigMap map;
  if (!flags.config_path.empty()) map = cli::load_config(flags.config_path);
  cli::RunConfig cfg = cli::make_run_config(map);
  if (flags.seed) {
    cfg.simulation.seed = *flags.seed;
    cfg.fig1.seed = cfg.fig2.seed = cfg.fig3.seed = *flags.seed;
  }
  if (flags.threads) {
    if (*flags.threads < 1) throw std::invalid_argument("--threads: must be >= 1");
    cfg.threads = *flags.threads;
  }
  return cfg;
}

fs::path prepare_out(const std::string& dir) {
  fs::path out(dir);
  fs::create_directories(out);
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_generate(const CommonFlags& flags, bool emit_config) {
  const cli::RunConfig cfg = effective_config(flags);
  const fs::path out = prepare_out(flags.out_dir);

  const SplitRng rng(cfg.simulation.seed);
  const auto truth = model::generate_scores(cfg.simulation, rng);
  const auto data = model::sample_comparisons(truth, cfg.simulation.epsilon, rng);

  io::save_model((out / "model.txt").string(), cfg.simulation, truth);
  io::save_dataset((out / "dataset.txt").string(), cfg.simulation, data);
  if (emit_config) write_file(out / "config.ini", cli::emit_config(cfg));

  const double density =
      data.pair_count() == 0
          ? 0.0
          : double(data.total_records()) / (double(data.n()) * data.pair_count());
  std::cout << "wrote " << (out / "model.txt").string() << " and "
            << (out / "dataset.txt").string() << "\n"
            << "n = " << data.n() << ", m = " << data.m
            << ", records = " << data.total_records() << ", density = "
            << io::format_double(density) << "\n";
  const std::string warning = cfg.simulation.theory_range_warning();
  if (!warning.empty()) std::cout << "note: " << warning << "\n";
  return kExitOk;
}

int cmd_run(const CommonFlags& flags, const std::string& dataset_path,
            const std::string& truth_path) {
  const cli::RunConfig cfg = effective_config(flags);
  const fs::path out = prepare_out(flags.out_dir);

  const io::LoadedDataset loaded = io::load_dataset(dataset_path);
  std::optional<io::LoadedModel> truth;
  if (!truth_path.empty()) {
    truth = io::load_model(truth_path);
    if (truth->config.m != loaded.config.m || truth->model.n() != loaded.dataset.n())
      throw std::invalid_argument("run: truth dimensions do not match the dataset");
  }

  pipeline::PipelineParams params = cfg.params;
  params.clustering.r = loaded.config.r;
  params.threads = cfg.threads;
  model::SimulationConfig sim = loaded.config;
  if (flags.seed) sim.seed = *flags.seed;

  const auto result = pipeline::run_algorithm1(
      loaded.dataset, sim, params, truth ? &truth->model : nullptr, SplitRng(sim.seed));

  write_file(out / "clustering.csv", spectral::clustering_to_csv(result.clustering));
  for (int k = 0; k < result.clustering.r; ++k)
    write_file(out / ("cluster_" + std::to_string(k) + "_scores.csv"),
               btmle::estimate_to_csv(result.estimates[k]));

  std::ostringstream metrics;
  metrics << "{\n  \"degenerate\": " << (result.degenerate ? "true" : "false");
  if (!result.degenerate_reason.empty())
    metrics << ",\n  \"degenerate_reason\": \"" << result.degenerate_reason << "\"";
  metrics << ",\n  \"eta1\": " << io::format_double(result.rates.eta1)
          << ",\n  \"eta2\": " << io::format_double(result.rates.eta2);
  if (result.has_truth_metrics) {
    Eigen::VectorXd errors = result.per_user_relative_error;
    std::sort(errors.begin(), errors.end());
    const double median = errors.size() == 0 ? 0.0
                          : (errors.size() % 2 ? errors[errors.size() / 2]
                                               : 0.5 * (errors[errors.size() / 2 - 1] +
                                                        errors[errors.size() / 2]));
    metrics << ",\n  \"misclustered_fraction\": "
            << io::format_double(result.misclustered_fraction)
            << ",\n  \"median_relative_error\": " << io::format_double(median);
  }
  metrics << ",\n  \"clusters\": [";
  for (int k = 0; k < result.clustering.r; ++k) {
    if (k) metrics << ", ";
    metrics << btmle::estimate_diagnostics_json(result.estimates[k]);
  }
  metrics << "]\n}\n";
  write_file(out / "metrics.json", metrics.str());

  std::cout << "wrote clustering.csv, per-cluster score CSVs and metrics.json under "
            << out.string() << "\n";
  if (!result.all_converged()) {
    std::cerr << "warning: at least one cluster estimate did not converge\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_experiment(const CommonFlags& flags, const std::string& name) {
  const cli::RunConfig cfg = effective_config(flags);
  const fs::path out = prepare_out(flags.out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  if (name == "fig1") {
    const auto result = pipeline::experiment_angle(cfg.fig1, cfg.threads);
    write_file(out / "fig1_angle.csv", result.csv);
    write_file(out / "fig1_manifest.json",
               pipeline::experiment_manifest(
                   "fig1", cfg.fig1.seed, cfg.threads, seconds_since(t0),
                   {{"m", std::to_string(cfg.fig1.m)},
                    {"trials", std::to_string(cfg.fig1.trials)}}));
    std::cout << "wrote fig1_angle.csv (" << result.profile.b_grid.size() << " rows)\n";
    return kExitOk;
  }
  if (name == "fig2") {
    const auto result = pipeline::experiment_clustering_frontier(cfg.fig2, cfg.threads);
    write_file(out / "fig2_cells.csv", result.cells_csv);
    write_file(out / "fig2_frontier.csv", result.frontier_csv);
    write_file(out / "fig2_manifest.json",
               pipeline::experiment_manifest(
                   "fig2", cfg.fig2.seed, cfg.threads, seconds_since(t0),
                   {{"m", std::to_string(cfg.fig2.m)},
                    {"n", std::to_string(cfg.fig2.n)},
                    {"b", io::format_double(cfg.fig2.b)},
                    {"trials", std::to_string(cfg.fig2.trials)},
                    {"success_threshold", io::format_double(cfg.fig2.success_threshold)}}));
    std::cout << "wrote fig2_cells.csv and fig2_frontier.csv\n";
    return kExitOk;
  }
  if (name == "fig3") {
    const auto result = pipeline::experiment_score_error(cfg.fig3, cfg.threads);
    write_file(out / "fig3_curves.csv", result.curves_csv);
    write_file(out / "fig3_summary.csv", result.summary_csv);
    write_file(out / "fig3_manifest.json",
               pipeline::experiment_manifest(
                   "fig3", cfg.fig3.seed, cfg.threads, seconds_since(t0),
                   {{"m", std::to_string(cfg.fig3.m)},
                    {"n", std::to_string(cfg.fig3.n)},
                    {"b", io::format_double(cfg.fig3.b)},
                    {"epsilon", io::format_double(cfg.fig3.epsilon)},
                    {"trials", std::to_string(cfg.fig3.trials)}}));
    std::cout << "wrote fig3_curves.csv and fig3_summary.csv\n";
    return kExitOk;
  }
  throw std::invalid_argument("unknown experiment '" + name + "' (expected fig1, fig2 or fig3)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-cluster projected ranking pipeline"};
  app.require_subcommand(1);

  CommonFlags gen_flags, run_flags, exp_flags;
  bool emit_config = false;
  std::string dataset_path, truth_path, experiment_name;

  CLI::App* generate = app.add_subcommand("generate", "write a synthetic model and dataset");
  add_common(generate, gen_flags);
  generate->add_flag("--emit-config", emit_config, "also write the effective config.ini");

  CLI::App* run = app.add_subcommand("run", "run the pipeline on a dataset file");
  add_common(run, run_flags);
  run->add_option("--dataset", dataset_path, "dataset file")->required();
  run->add_option("--truth", truth_path, "ground-truth model file (optional)");

  CLI::App* experiment = app.add_subcommand("experiment", "reproduce an experiment table");
  add_common(experiment, exp_flags);
  experiment->add_option("name", experiment_name, "fig1, fig2 or fig3")->required();

  CLI::App* selfcheck = app.add_subcommand("selfcheck", "run the built-in oracle suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(gen_flags, emit_config);
    if (run->parsed()) return cmd_run(run_flags, dataset_path, truth_path);
    if (experiment->parsed()) return cmd_experiment(exp_flags, experiment_name);
    if (selfcheck->parsed()) return cli::run_selfcheck(std::cout) == 0 ? kExitOk : 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
