#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epirbn/experiment.hpp"
#include "epirbn/plot.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

int do_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
           const std::optional<std::string>& output_dir, int jobs) {
  epirbn::ExperimentSpec spec = epirbn::parse_config_text(read_file(config_path));
  if (seed) {
    spec.base_seed = *seed;
    spec.evolution.seed = *seed;
  }
  if (output_dir) spec.output_dir = *output_dir;
  epirbn::cmd_run(spec, jobs);
  std::cout << "wrote " << spec.output_dir << "/runs.csv and " << spec.output_dir
            << "/summary.csv\n";
  return 0;
}

int do_compare(const std::string& path_a, const std::string& path_b,
               const std::optional<std::string>& out_path) {
  const std::vector<epirbn::CompareRow> rows = epirbn::cmd_compare(path_a, path_b);
  for (const epirbn::CompareRow& row : rows) {
    std::printf("B=%d K=%d C=%d (runs %d vs %d)\n", row.point.b, row.point.k, row.point.c,
                row.runs_a, row.runs_b);
    std::printf("  fitness  %.4f vs %.4f  t=%+.3f p=%.4g%s\n", row.fit_mean_a, row.fit_mean_b,
                row.fit_test.t, row.fit_test.p,
                row.fit_test.p < epirbn::kSignificanceLevel ? "  significant" : "");
    std::printf("  epi_nodes %.2f vs %.2f  t=%+.3f p=%.4g%s\n", row.epi_mean_a, row.epi_mean_b,
                row.epi_test.t, row.epi_test.p,
                row.epi_test.p < epirbn::kSignificanceLevel ? "  significant" : "");
  }
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open \"" + *out_path + "\"");
    out << epirbn::format_compare_csv(rows);
    std::cout << "wrote " << *out_path << "\n";
  }
  return 0;
}

int do_plot(const std::string& summary_path, const std::string& out_dir) {
  for (const std::string& path : epirbn::cmd_plot(summary_path, out_dir))
    std::cout << "wrote " << path << "\n";
  return 0;
}

int do_attractors(const std::vector<int>& b_list, int genomes, int horizon, int r_nodes,
                  int n_traits, bool epigenetics, std::uint64_t seed,
                  const std::optional<std::string>& out_path) {
  epirbn::EvolutionParams params;
  params.r_nodes = r_nodes;
  params.n_traits = n_traits;
  params.epigenetics_enabled = epigenetics;
  const std::vector<epirbn::AttractorRow> rows =
      epirbn::attractor_survey(params, b_list, genomes, horizon, seed);
  for (int b : b_list) {
    int truncated = 0;
    for (const epirbn::AttractorRow& row : rows)
      if (row.b == b && row.report.truncated) ++truncated;
    std::printf("B=%d median cycle length %.1f (%d/%d truncated at horizon %d)\n", b,
                epirbn::median_cycle_length(rows, b, horizon), truncated, genomes, horizon);
  }
  if (out_path) {
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open \"" + *out_path + "\"");
    out << "B,genome_idx,transient,cycle_length,truncated\n";
    for (const epirbn::AttractorRow& row : rows)
      out << row.b << ',' << row.genome_idx << ',' << row.report.transient << ','
          << row.report.cycle_length << ',' << (row.report.truncated ? 1 : 0) << '\n';
    std::cout << "wrote " << *out_path << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolve Boolean regulatory networks with a methylation-style control layer"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "Execute the experiment sweep from a JSON config");
  std::string config_path;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_output;
  int run_jobs = 1;
  run_cmd->add_option("config", config_path, "JSON config file")
      ->required()
      ->check(CLI::ExistingFile);
  run_cmd->add_option("--seed", run_seed, "override the config's base seed");
  run_cmd->add_option("--output", run_output, "override the config's output directory");
  run_cmd->add_option("--jobs", run_jobs, "worker threads")->check(CLI::PositiveNumber);

  auto* compare_cmd =
      app.add_subcommand("compare", "Welch tests between two run CSVs, per parameter point");
  std::string compare_a, compare_b;
  std::optional<std::string> compare_out;
  compare_cmd->add_option("runs_a", compare_a, "first runs.csv")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("runs_b", compare_b, "second runs.csv")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--out", compare_out, "also write the report as CSV");

  auto* plot_cmd = app.add_subcommand("plot", "Render SVG charts from a summary CSV");
  std::string summary_path;
  std::string plot_out = "plots";
  plot_cmd->add_option("summary", summary_path, "summary.csv")->required()->check(CLI::ExistingFile);
  plot_cmd->add_option("--output", plot_out, "output directory");

  auto* attractors_cmd =
      app.add_subcommand("attractors", "Survey attractor lengths of random networks");
  std::vector<int> att_b_list{1, 2, 3, 4, 5};
  int att_genomes = 50;
  int att_horizon = 10000;
  int att_r = 100;
  int att_n = 10;
  bool att_epi = false;
  std::uint64_t att_seed = 1;
  std::optional<std::string> att_out;
  attractors_cmd->add_option("--b-list", att_b_list, "connectivity values to sample");
  attractors_cmd->add_option("--genomes", att_genomes, "random genomes per B")
      ->check(CLI::PositiveNumber);
  attractors_cmd->add_option("--horizon", att_horizon, "step limit per genome")
      ->check(CLI::PositiveNumber);
  attractors_cmd->add_option("-R,--nodes", att_r, "network size");
  attractors_cmd->add_option("-N,--traits", att_n, "trait count");
  attractors_cmd->add_flag("--epigenetics", att_epi, "sample genomes with epigenetic nodes");
  attractors_cmd->add_option("--seed", att_seed, "base seed");
  attractors_cmd->add_option("--out", att_out, "write per-genome rows as CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(config_path, run_seed, run_output, run_jobs);
    if (compare_cmd->parsed()) return do_compare(compare_a, compare_b, compare_out);
    if (plot_cmd->parsed()) return do_plot(summary_path, plot_out);
    if (attractors_cmd->parsed())
      return do_attractors(att_b_list, att_genomes, att_horizon, att_r, att_n, att_epi, att_seed,
                           att_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
