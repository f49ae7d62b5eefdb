#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epirbn/experiment.hpp"
#include "epirbn/plot.hpp"

using namespace epirbn;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "epirbn_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  REQUIRE(file);
  std::ostringstream buf;
  buf << file.rdbuf();
  return buf.str();
}

long line_count(const std::string& text) {
  return std::count(text.begin(), text.end(), '\n');
}

ExperimentSpec tiny_spec(const std::string& dir) {
  return parse_config_text(R"({
    "scenario": {"kind": "static_single", "cycles": 8},
    "evolution": {"R": 15, "N": 5, "B_list": [2], "K_list": [1], "generations": 40, "seed": 77},
    "protocol": {"landscapes_per_point": 2, "runs_per_landscape": 2, "record_stride": 10},
    "output": {"dir": ")" + dir + R"("}
  })");
}

}  // namespace

TEST_CASE("an empty config produces the documented defaults") {
  const ExperimentSpec spec = parse_config_text("{}");
  REQUIRE(spec.scenario.kind == ScenarioKind::static_single);
  REQUIRE(spec.scenario.cycles == 100);
  REQUIRE_FALSE(spec.scenario.heritable);
  REQUIRE(spec.scenario.reset_states);
  REQUIRE_FALSE(spec.scenario.development_enabled);
  REQUIRE(spec.evolution.r_nodes == 100);
  REQUIRE(spec.evolution.n_traits == 10);
  REQUIRE(spec.evolution.generations == 30000);
  REQUIRE(spec.evolution.epigenetics_enabled);
  REQUIRE(spec.evolution.initial_epi_fraction == 0.5);
  REQUIRE(spec.b_list == std::vector<int>{1, 2, 3, 4, 5});
  REQUIRE(spec.k_list == std::vector<int>{2});
  REQUIRE(spec.c_list.empty());
  REQUIRE(spec.landscapes_per_point == 10);
  REQUIRE(spec.runs_per_landscape == 10);
  REQUIRE(spec.base_seed == 1);
  REQUIRE(spec.output_dir == "results");
}

TEST_CASE("unknown config keys are named in the error") {
  REQUIRE_THROWS_WITH(parse_config_text(R"({"banana": 1})"),
                      Catch::Matchers::ContainsSubstring("banana"));
  REQUIRE_THROWS_WITH(parse_config_text(R"({"scenario": {"banana": 1}})"),
                      Catch::Matchers::ContainsSubstring("banana") &&
                          Catch::Matchers::ContainsSubstring("scenario"));
  REQUIRE_THROWS_WITH(parse_config_text(R"({"protocol": {"banana": 1}})"),
                      Catch::Matchers::ContainsSubstring("banana"));
}

TEST_CASE("out-of-range parameters are named in the error") {
  REQUIRE_THROWS_WITH(parse_config_text(R"({"evolution": {"B_list": [2, 7]}})"),
                      Catch::Matchers::ContainsSubstring("B=7"));
  REQUIRE_THROWS_WITH(parse_config_text(R"({"evolution": {"K_list": [12]}})"),
                      Catch::Matchers::ContainsSubstring("K=12"));
  REQUIRE_THROWS_WITH(
      parse_config_text(R"({"scenario": {"kind": "multicell"}, "evolution": {"C_list": [0]}})"),
      Catch::Matchers::ContainsSubstring("C=0"));
  REQUIRE_THROWS_AS(parse_config_text(R"({"scenario": {"kind": "mystery"}})"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"scenario": {"cycles": 0}})"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"scenario": {"kind": "switching", "cycles": 9}})"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"evolution": {"C_list": [1]}})"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"evolution": {"generations": 0}})"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"protocol": {"landscapes_per_point": 0}})"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"protocol": {"record_stride": 0}})"),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"evolution": {"R": 20}})"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config_text(R"({"evolution": {"initial_epi_fraction": 1.5}})"),
                    std::invalid_argument);
  REQUIRE(parse_config_text(R"({"evolution": {"initial_epi_fraction": 0}})")
              .evolution.initial_epi_fraction == 0.0);
  REQUIRE_THROWS_WITH(parse_config_text("not json"),
                      Catch::Matchers::ContainsSubstring("not valid JSON"));
}

TEST_CASE("scenario kinds wire their own defaults") {
  const ExperimentSpec sw = parse_config_text(R"({"scenario": {"kind": "switching"}})");
  REQUIRE(sw.scenario.heritable);
  REQUIRE(sw.evolution.heritable_epigenetics);

  const ExperimentSpec sw_off =
      parse_config_text(R"({"scenario": {"kind": "switching", "heritable": false}})");
  REQUIRE_FALSE(sw_off.scenario.heritable);

  const ExperimentSpec mc = parse_config_text(R"({"scenario": {"kind": "multicell"}})");
  REQUIRE(mc.c_list == std::vector<int>{1});
  REQUIRE(mc.scenario.heterogeneous_landscapes);
  REQUIRE_FALSE(mc.scenario.heritable);

  const ExperimentSpec mc_homo = parse_config_text(
      R"({"scenario": {"kind": "multicell", "heterogeneous": false, "development": true}})");
  REQUIRE_FALSE(mc_homo.scenario.heterogeneous_landscapes);
  REQUIRE(mc_homo.scenario.development_enabled);
  REQUIRE(mc_homo.evolution.development_enabled);
}

TEST_CASE("seeds depend on every job coordinate and nothing else") {
  const ParamPoint p{3, 2, 1};
  REQUIRE(landscape_seed(1, p, 0) == landscape_seed(1, p, 0));
  REQUIRE(landscape_seed(1, p, 0) != landscape_seed(1, p, 1));
  REQUIRE(landscape_seed(1, p, 0) != landscape_seed(2, p, 0));
  REQUIRE(landscape_seed(1, p, 0) != landscape_seed(1, {4, 2, 1}, 0));
  REQUIRE(landscape_seed(1, p, 0) != landscape_seed(1, {3, 3, 1}, 0));
  REQUIRE(landscape_seed(1, p, 0) != landscape_seed(1, {3, 2, 2}, 0));
  REQUIRE(run_seed(1, p, 0, 0) == run_seed(1, p, 0, 0));
  REQUIRE(run_seed(1, p, 0, 0) != run_seed(1, p, 0, 1));
  REQUIRE(run_seed(1, p, 0, 0) != landscape_seed(1, p, 0));
}

TEST_CASE("recorded generations keep the stride points and the final one") {
  REQUIRE(recorded_generations(10, 3) == std::vector<int>{3, 6, 9, 10});
  REQUIRE(recorded_generations(10, 5) == std::vector<int>{5, 10});
  REQUIRE(recorded_generations(3, 100) == std::vector<int>{3});
  REQUIRE(recorded_generations(100, 100) == std::vector<int>{100});
  REQUIRE(recorded_generations(1, 1) == std::vector<int>{1});
}

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, 0.5, 1.0 / 3.0, 0.30000000000000004, 123.456, 1e-9}) {
    const std::string text = format_double(v);
    REQUIRE(detail::parse_double_field(text, "test") == v);
  }
  REQUIRE(format_double(0.5) == "0.5");
}

TEST_CASE("the sweep enumerates points and jobs in a fixed order") {
  ExperimentSpec spec = parse_config_text(
      R"({"evolution": {"B_list": [1, 3], "K_list": [2]},
          "protocol": {"landscapes_per_point": 2, "runs_per_landscape": 3}})");
  const std::vector<ParamPoint> points = sweep_points(spec);
  REQUIRE(points == std::vector<ParamPoint>{{1, 2, 0}, {3, 2, 0}});
  const std::vector<RunJob> jobs = sweep_jobs(spec);
  REQUIRE(jobs.size() == 12);
  REQUIRE(jobs[0].point == points[0]);
  REQUIRE(jobs[0].landscape_idx == 0);
  REQUIRE(jobs[0].run_idx == 0);
  REQUIRE(jobs[1].run_idx == 1);
  REQUIRE(jobs[3].landscape_idx == 1);
  REQUIRE(jobs[6].point == points[1]);

  const ExperimentSpec mc = parse_config_text(
      R"({"scenario": {"kind": "multicell"}, "evolution": {"B_list": [2], "C_list": [1, 2]}})");
  REQUIRE(sweep_points(mc) == std::vector<ParamPoint>{{2, 2, 1}, {2, 2, 2}});
}

TEST_CASE("landscape construction per scenario kind") {
  ScenarioConfig cfg;
  cfg.kind = ScenarioKind::switching;
  const LandscapeSet sw = make_landscapes(cfg, 5, {2, 1, 0}, 99);
  REQUIRE(sw.nk_a.has_value());
  REQUIRE(sw.nk_b.has_value());
  REQUIRE(sw.nk_a->tables != sw.nk_b->tables);
  const LandscapeSet sw2 = make_landscapes(cfg, 5, {2, 1, 0}, 99);
  REQUIRE(sw.nk_a->tables == sw2.nk_a->tables);

  cfg.kind = ScenarioKind::multicell;
  cfg.heterogeneous_landscapes = true;
  const LandscapeSet hetero = make_landscapes(cfg, 5, {2, 1, 1}, 99);
  REQUIRE(hetero.nkcs_m->tables != hetero.nkcs_d->tables);
  cfg.heterogeneous_landscapes = false;
  const LandscapeSet homo = make_landscapes(cfg, 5, {2, 1, 1}, 99);
  REQUIRE(homo.nkcs_m->tables == homo.nkcs_d->tables);
  REQUIRE(homo.nkcs_m->tables == hetero.nkcs_m->tables);
}

TEST_CASE("cmd_run writes complete, deterministic files") {
  const fs::path dir_a = fresh_dir("run_a");
  cmd_run(tiny_spec(dir_a.string()));
  const std::string runs_a = slurp(dir_a / "runs.csv");
  const std::string summary_a = slurp(dir_a / "summary.csv");

  // 4 runs x generations {10,20,30,40} plus the header.
  REQUIRE(line_count(runs_a) == 17);
  REQUIRE(line_count(summary_a) == 2);
  REQUIRE(runs_a.rfind(kRunCsvHeader, 0) == 0);
  REQUIRE(summary_a.rfind(kSummaryCsvHeader, 0) == 0);

  const fs::path dir_b = fresh_dir("run_b");
  cmd_run(tiny_spec(dir_b.string()));
  REQUIRE(slurp(dir_b / "runs.csv") == runs_a);
  REQUIRE(slurp(dir_b / "summary.csv") == summary_a);

  const fs::path dir_c = fresh_dir("run_c");
  cmd_run(tiny_spec(dir_c.string()), 3);
  REQUIRE(slurp(dir_c / "runs.csv") == runs_a);
  REQUIRE(slurp(dir_c / "summary.csv") == summary_a);

  const fs::path dir_d = fresh_dir("run_d");
  ExperimentSpec reseeded = tiny_spec(dir_d.string());
  reseeded.base_seed = 78;
  reseeded.evolution.seed = 78;
  cmd_run(reseeded);
  REQUIRE(slurp(dir_d / "runs.csv") != runs_a);
}

TEST_CASE("cmd_run reports run and summary rows that agree") {
  const fs::path dir = fresh_dir("run_consistency");
  std::atomic<int> observed{0};
  cmd_run(tiny_spec(dir.string()), 1, [&](const RunJob& job, const RunRecord& rec) {
    ++observed;
    REQUIRE(rec.series.size() == 40);
    REQUIRE(job.point.b == 2);
  });
  REQUIRE(observed == 4);

  const RunTable table = load_run_csv((dir / "runs.csv").string());
  REQUIRE(table.size() == 1);
  const PointSamples& samples = table.at({2, 1, 0});
  REQUIRE(samples.fitness.size() == 4);

  const std::vector<SummaryRow> summary = load_summary_csv((dir / "summary.csv").string());
  REQUIRE(summary.size() == 1);
  REQUIRE(summary[0].scenario == "static_single");
  REQUIRE(summary[0].stats.runs == 4);
  REQUIRE(summary[0].stats.fit_mean == detail::sample_mean(samples.fitness));
  const auto [min_it, max_it] = std::minmax_element(samples.fitness.begin(), samples.fitness.end());
  REQUIRE(summary[0].stats.fit_min == *min_it);
  REQUIRE(summary[0].stats.fit_max == *max_it);
}

TEST_CASE("cmd_run fails fast on an unusable output directory") {
  const fs::path dir = fresh_dir("run_blocked");
  const fs::path blocker = dir / "blocker";
  std::ofstream(blocker).put('x');
  ExperimentSpec spec = tiny_spec((blocker / "out").string());
  REQUIRE_THROWS_AS(cmd_run(spec), std::runtime_error);
}

TEST_CASE("run CSV loading keeps only each run's last generation") {
  const fs::path dir = fresh_dir("load_csv");
  const fs::path path = dir / "runs.csv";
  {
    std::ofstream out(path, std::ios::binary);
    out << kRunCsvHeader << '\n';
    out << "static_single,2,1,0,0,0,10,0.25,4,0\n";
    out << "static_single,2,1,0,0,0,40,0.5,3,0\n";
    out << "static_single,2,1,0,0,1,40,0.75,2,1\n";
  }
  const RunTable table = load_run_csv(path.string());
  const PointSamples& samples = table.at({2, 1, 0});
  REQUIRE(samples.fitness == std::vector<double>{0.5, 0.75});
  REQUIRE(samples.epi_nodes == std::vector<double>{3.0, 2.0});
  REQUIRE(samples.dev_steps == std::vector<double>{0.0, 1.0});

  const fs::path bad_header = dir / "bad.csv";
  std::ofstream(bad_header) << "something,else\n";
  REQUIRE_THROWS_WITH(load_run_csv(bad_header.string()),
                      Catch::Matchers::ContainsSubstring("not a run CSV"));

  const fs::path bad_fields = dir / "fields.csv";
  {
    std::ofstream out(bad_fields);
    out << kRunCsvHeader << '\n' << "static_single,2,1,0,0,0,10,0.25\n";
  }
  REQUIRE_THROWS_AS(load_run_csv(bad_fields.string()), std::invalid_argument);
  REQUIRE_THROWS_AS(load_run_csv((dir / "missing.csv").string()), std::runtime_error);
}

TEST_CASE("comparing a run file with itself is the exact null everywhere") {
  const fs::path dir = fresh_dir("compare_self");
  cmd_run(tiny_spec(dir.string()));
  const std::string path = (dir / "runs.csv").string();
  const std::vector<CompareRow> rows = cmd_compare(path, path);
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].fit_test.t == 0.0);
  REQUIRE(rows[0].fit_test.p == 1.0);
  REQUIRE(rows[0].epi_test.p == 1.0);
  REQUIRE(rows[0].fit_mean_a == rows[0].fit_mean_b);
}

TEST_CASE("comparison requires matching parameter points") {
  const fs::path dir = fresh_dir("compare_points");
  const fs::path a = dir / "a.csv";
  const fs::path b = dir / "b.csv";
  {
    std::ofstream out(a);
    out << kRunCsvHeader << '\n';
    out << "static_single,2,1,0,0,0,10,0.5,3,0\n";
    out << "static_single,2,1,0,0,1,10,0.6,3,0\n";
  }
  {
    std::ofstream out(b);
    out << kRunCsvHeader << '\n';
    out << "static_single,3,1,0,0,0,10,0.5,3,0\n";
    out << "static_single,3,1,0,0,1,10,0.6,3,0\n";
  }
  REQUIRE_THROWS_WITH(cmd_compare(a.string(), b.string()),
                      Catch::Matchers::ContainsSubstring("B=2") &&
                          Catch::Matchers::ContainsSubstring("B=3"));
}

TEST_CASE("comparison detects a planted fitness separation") {
  const fs::path dir = fresh_dir("compare_planted");
  const fs::path a = dir / "a.csv";
  const fs::path b = dir / "b.csv";
  {
    std::ofstream out(a);
    out << kRunCsvHeader << '\n';
    int run = 0;
    for (double fit : {0.10, 0.20, 0.15, 0.25, 0.18, 0.22})
      out << "static_single,2,1,0,0," << run++ << ",10," << format_double(fit) << ",3,0\n";
  }
  {
    std::ofstream out(b);
    out << kRunCsvHeader << '\n';
    int run = 0;
    for (double fit : {0.70, 0.80, 0.75, 0.85, 0.78, 0.82})
      out << "static_single,2,1,0,0," << run++ << ",10," << format_double(fit) << ",3,0\n";
  }
  const std::vector<CompareRow> rows = cmd_compare(a.string(), b.string());
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].runs_a == 6);
  REQUIRE_THAT(rows[0].fit_mean_a, Catch::Matchers::WithinAbs(0.1833333333, 1e-9));
  REQUIRE(rows[0].fit_test.t < 0.0);
  REQUIRE(rows[0].fit_test.p < kSignificanceLevel);
  REQUIRE(rows[0].epi_test.degenerate);
  REQUIRE(rows[0].epi_test.p == 1.0);

  const std::string csv = format_compare_csv(rows);
  REQUIRE(csv.rfind(kCompareCsvHeader, 0) == 0);
  std::istringstream lines(csv);
  std::string header, row;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  const std::vector<std::string> fields = detail::split_csv_line(row);
  REQUIRE(fields.size() == 15);
  REQUIRE(fields[0] == "2");
  REQUIRE(fields[9] == "1");   // fitness difference flagged significant
  REQUIRE(fields[14] == "0");  // equal epigenetic counts are not
}

TEST_CASE("attractor survey is deterministic and medians are well defined") {
  EvolutionParams base;
  base.r_nodes = 12;
  base.n_traits = 3;
  const std::vector<AttractorRow> rows = attractor_survey(base, {1, 2}, 5, 200, 7);
  REQUIRE(rows.size() == 10);
  const std::vector<AttractorRow> again = attractor_survey(base, {1, 2}, 5, 200, 7);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].b == again[i].b);
    REQUIRE(rows[i].report.transient == again[i].report.transient);
    REQUIRE(rows[i].report.cycle_length == again[i].report.cycle_length);
  }
  for (const AttractorRow& row : rows) {
    if (!row.report.truncated) {
      REQUIRE(row.report.cycle_length >= 1);
      REQUIRE(row.report.transient + row.report.cycle_length <= 200);
    }
  }

  std::vector<AttractorRow> crafted;
  crafted.push_back({1, 0, {0, 3, false}});
  crafted.push_back({1, 1, {0, 1, false}});
  crafted.push_back({1, 2, {0, 2, false}});
  REQUIRE(median_cycle_length(crafted, 1, 100) == 2.0);
  crafted.push_back({1, 3, {100, 0, true}});  // counts as the horizon
  REQUIRE(median_cycle_length(crafted, 1, 100) == 2.5);
  REQUIRE_THROWS_AS(median_cycle_length(crafted, 9, 100), std::invalid_argument);
}

TEST_CASE("plots place the whiskers at the data extremes") {
  const fs::path dir = fresh_dir("plot");
  cmd_run(tiny_spec(dir.string()));
  const std::vector<SummaryRow> rows = load_summary_csv((dir / "summary.csv").string());
  const std::string svg = render_metric_svg(rows, PlotMetric::fitness);
  REQUIRE(svg.find("<svg") == 0);
  REQUIRE(svg.find("fitness vs B") != std::string::npos);
  REQUIRE(svg.find(">2</text>") != std::string::npos);

  const auto [lo, hi] = plot_value_range(rows, PlotMetric::fitness);
  const double x = plot_x(0, 1);
  const double y_min = plot_y(rows[0].stats.fit_min, lo, hi);
  const double y_max = plot_y(rows[0].stats.fit_max, lo, hi);
  const std::string whisker = "<line x1=\"" + plot_coord(x) + "\" y1=\"" + plot_coord(y_min) +
                              "\" x2=\"" + plot_coord(x) + "\" y2=\"" + plot_coord(y_max) + "\"";
  REQUIRE(svg.find(whisker) != std::string::npos);
  REQUIRE(render_metric_svg(rows, PlotMetric::fitness) == svg);

  const std::vector<std::string> written = cmd_plot((dir / "summary.csv").string(),
                                                    (dir / "plots").string());
  REQUIRE(written.size() == 3);
  for (const std::string& path : written) REQUIRE(fs::exists(path));
  REQUIRE(slurp(written[0]) == svg);

  REQUIRE_THROWS_WITH(load_summary_csv((dir / "runs.csv").string()),
                      Catch::Matchers::ContainsSubstring("not a summary CSV"));
}

TEST_CASE("parallel_for matches serial execution and propagates failures") {
  std::vector<int> serial(40, 0), pooled(40, 0);
  parallel_for(40, 1, [&](std::size_t i) { serial[i] = static_cast<int>(i * i); });
  parallel_for(40, 4, [&](std::size_t i) { pooled[i] = static_cast<int>(i * i); });
  REQUIRE(serial == pooled);
  REQUIRE_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 5) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
}
