#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "epirbn/analysis.hpp"
#include "epirbn/evolution.hpp"
#include "epirbn/landscape.hpp"
#include "epirbn/rng.hpp"
#include "epirbn/scenarios.hpp"

namespace epirbn {

// ---------------------------------------------------------------------------
// Experiment specification

// One point of the parameter sweep. c is 0 for single-cell scenarios.
struct ParamPoint {
  int b = 0;
  int k = 0;
  int c = 0;
  friend bool operator==(const ParamPoint&, const ParamPoint&) = default;
  friend auto operator<=>(const ParamPoint&, const ParamPoint&) = default;
};

struct ExperimentSpec {
  ScenarioConfig scenario;
  // Template for every run; b_connectivity and the scenario-linked flags are
  // filled in per job.
  EvolutionParams evolution;
  std::vector<int> b_list{1, 2, 3, 4, 5};
  std::vector<int> k_list{2};
  std::vector<int> c_list;  // multicell only
  int landscapes_per_point = 10;
  int runs_per_landscape = 10;
  int record_stride = 100;  // run CSV keeps every record_stride-th generation
  std::uint64_t base_seed = 1;
  std::string output_dir = "results";
};

inline const char* scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::static_single: return "static_single";
    case ScenarioKind::switching: return "switching";
    case ScenarioKind::multicell: return "multicell";
  }
  return "unknown";
}

inline ScenarioKind scenario_kind_from_name(const std::string& name) {
  if (name == "static_single") return ScenarioKind::static_single;
  if (name == "switching") return ScenarioKind::switching;
  if (name == "multicell") return ScenarioKind::multicell;
  throw std::invalid_argument("config: unknown scenario kind \"" + name + "\"");
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                std::initializer_list<const char*> allowed, const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known)
      throw std::invalid_argument("config: unknown key \"" + it.key() + "\" in " + where);
  }
}

inline std::vector<int> int_list(const nlohmann::json& value, const char* where) {
  if (!value.is_array() || value.empty())
    throw std::invalid_argument(std::string("config: ") + where + " must be a non-empty list");
  std::vector<int> out;
  out.reserve(value.size());
  for (const auto& item : value) out.push_back(item.get<int>());
  return out;
}

}  // namespace detail

// Build an ExperimentSpec from a JSON document, filling defaults (R=100,
// N=10, 30,000 generations, 100 cycles, 10x10 runs) and rejecting unknown
// or out-of-range keys with messages that name the offender.
inline ExperimentSpec parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  detail::reject_unknown_keys(doc, {"scenario", "evolution", "protocol", "output"}, "top level");
  ExperimentSpec spec;

  const nlohmann::json scenario = doc.value("scenario", nlohmann::json::object());
  detail::reject_unknown_keys(
      scenario, {"kind", "cycles", "heritable", "reset_states", "heterogeneous", "development"},
      "scenario");
  spec.scenario.kind = scenario_kind_from_name(scenario.value("kind", "static_single"));
  spec.scenario.cycles = scenario.value("cycles", 100);
  // The changing-environment experiments inherit epigenetic state by
  // construction, so that kind defaults to heritable.
  spec.scenario.heritable = scenario.value("heritable", spec.scenario.kind == ScenarioKind::switching);
  spec.scenario.reset_states = scenario.value("reset_states", true);
  spec.scenario.heterogeneous_landscapes = scenario.value("heterogeneous", true);
  spec.scenario.development_enabled = scenario.value("development", false);

  const nlohmann::json evolution = doc.value("evolution", nlohmann::json::object());
  detail::reject_unknown_keys(evolution,
                              {"R", "N", "B_list", "K_list", "C_list", "generations", "seed",
                               "epigenetics", "initial_epi_fraction"},
                              "evolution");
  spec.evolution.r_nodes = evolution.value("R", 100);
  spec.evolution.n_traits = evolution.value("N", 10);
  spec.evolution.generations = evolution.value("generations", 30000);
  spec.evolution.epigenetics_enabled = evolution.value("epigenetics", true);
  spec.evolution.initial_epi_fraction = evolution.value("initial_epi_fraction", 0.5);
  spec.base_seed = evolution.value("seed", std::uint64_t{1});
  spec.evolution.seed = spec.base_seed;
  spec.evolution.heritable_epigenetics = spec.scenario.heritable;
  spec.evolution.reset_states = spec.scenario.reset_states;
  spec.evolution.development_enabled = spec.scenario.development_enabled;
  if (evolution.contains("B_list")) spec.b_list = detail::int_list(evolution.at("B_list"), "B_list");
  if (evolution.contains("K_list")) spec.k_list = detail::int_list(evolution.at("K_list"), "K_list");
  if (evolution.contains("C_list")) {
    if (spec.scenario.kind != ScenarioKind::multicell)
      throw std::invalid_argument("config: C_list only applies to the multicell scenario");
    spec.c_list = detail::int_list(evolution.at("C_list"), "C_list");
  } else if (spec.scenario.kind == ScenarioKind::multicell) {
    spec.c_list = {1};
  }

  const nlohmann::json protocol = doc.value("protocol", nlohmann::json::object());
  detail::reject_unknown_keys(protocol,
                              {"landscapes_per_point", "runs_per_landscape", "record_stride"},
                              "protocol");
  spec.landscapes_per_point = protocol.value("landscapes_per_point", 10);
  spec.runs_per_landscape = protocol.value("runs_per_landscape", 10);
  spec.record_stride = protocol.value("record_stride", 100);

  const nlohmann::json output = doc.value("output", nlohmann::json::object());
  detail::reject_unknown_keys(output, {"dir"}, "output");
  spec.output_dir = output.value("dir", "results");

  for (int b : spec.b_list)
    if (b < 1 || b > kMaxConnectivity)
      throw std::invalid_argument("config: B=" + std::to_string(b) + " outside supported range [1, 5]");
  for (int k : spec.k_list)
    if (k < 0 || k > 5 || k >= spec.evolution.n_traits)
      throw std::invalid_argument("config: K=" + std::to_string(k) +
                                  " outside supported range [0, min(5, N-1)]");
  for (int c : spec.c_list)
    if (c < 1 || c > 5 || c > spec.evolution.n_traits)
      throw std::invalid_argument("config: C=" + std::to_string(c) +
                                  " outside supported range [1, min(5, N)]");
  if (spec.scenario.cycles < 1) throw std::invalid_argument("config: cycles must be >= 1");
  if (spec.scenario.kind == ScenarioKind::switching && spec.scenario.cycles % 2 != 0)
    throw std::invalid_argument("config: the switching scenario needs an even cycle count");
  if (spec.landscapes_per_point < 1 || spec.runs_per_landscape < 1)
    throw std::invalid_argument("config: protocol counts must be >= 1");
  if (spec.record_stride < 1) throw std::invalid_argument("config: record_stride must be >= 1");
  EvolutionParams probe = spec.evolution;
  for (int b : spec.b_list) {
    probe.b_connectivity = b;
    validate_params(probe);
  }
  return spec;
}

inline ExperimentSpec parse_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + err.what());
  }
  return parse_config(doc);
}

// ---------------------------------------------------------------------------
// Deterministic seeding and job layout

namespace detail {

inline constexpr std::uint64_t kLandscapeTag = 0x6c616e64u;  // "land"
inline constexpr std::uint64_t kRunTag = 0x72756eu;          // "run"
inline constexpr std::uint64_t kAttractorTag = 0x61747472u;  // "attr"

}  // namespace detail

// Seeds depend only on the base seed and the job's coordinates, never on
// scheduling, so any worker count reproduces the same streams.
inline std::uint64_t landscape_seed(std::uint64_t base, const ParamPoint& pt, int land_idx) {
  return mix_seed(base, {detail::kLandscapeTag, static_cast<std::uint64_t>(pt.b),
                         static_cast<std::uint64_t>(pt.k), static_cast<std::uint64_t>(pt.c),
                         static_cast<std::uint64_t>(land_idx)});
}

inline std::uint64_t run_seed(std::uint64_t base, const ParamPoint& pt, int land_idx, int run_idx) {
  return mix_seed(base, {detail::kRunTag, static_cast<std::uint64_t>(pt.b),
                         static_cast<std::uint64_t>(pt.k), static_cast<std::uint64_t>(pt.c),
                         static_cast<std::uint64_t>(land_idx), static_cast<std::uint64_t>(run_idx)});
}

struct RunJob {
  ParamPoint point;
  int landscape_idx = 0;
  int run_idx = 0;
};

inline std::vector<ParamPoint> sweep_points(const ExperimentSpec& spec) {
  std::vector<ParamPoint> points;
  const std::vector<int> c_values =
      spec.scenario.kind == ScenarioKind::multicell ? spec.c_list : std::vector<int>{0};
  for (int b : spec.b_list)
    for (int k : spec.k_list)
      for (int c : c_values) points.push_back({b, k, c});
  return points;
}

inline std::vector<RunJob> sweep_jobs(const ExperimentSpec& spec) {
  std::vector<RunJob> jobs;
  for (const ParamPoint& pt : sweep_points(spec))
    for (int land = 0; land < spec.landscapes_per_point; ++land)
      for (int run = 0; run < spec.runs_per_landscape; ++run) jobs.push_back({pt, land, run});
  return jobs;
}

// Regenerate the landscapes a job evaluates on. Every job rebuilds its own
// copy from the landscape seed, so jobs share nothing.
inline LandscapeSet make_landscapes(const ScenarioConfig& cfg, int n_traits, const ParamPoint& pt,
                                    std::uint64_t seed) {
  Rng rng(seed);
  LandscapeSet lands;
  switch (cfg.kind) {
    case ScenarioKind::static_single:
      lands.nk_a = generate_nk(rng, n_traits, pt.k);
      break;
    case ScenarioKind::switching:
      lands.nk_a = generate_nk(rng, n_traits, pt.k);
      lands.nk_b = generate_nk(rng, n_traits, pt.k);
      break;
    case ScenarioKind::multicell:
      lands.nkcs_m = generate_nkcs(rng, n_traits, pt.k, pt.c, 1);
      lands.nkcs_d = cfg.heterogeneous_landscapes ? generate_nkcs(rng, n_traits, pt.k, pt.c, 1)
                                                  : *lands.nkcs_m;
      break;
  }
  return lands;
}

inline RunRecord execute_run(const ExperimentSpec& spec, const RunJob& job) {
  ScenarioConfig cfg = spec.scenario;
  EvolutionParams params = spec.evolution;
  params.b_connectivity = job.point.b;
  params.heritable_epigenetics = cfg.heritable;
  params.reset_states = cfg.reset_states;
  params.development_enabled = cfg.development_enabled;
  params.seed = run_seed(spec.base_seed, job.point, job.landscape_idx, job.run_idx);
  const LandscapeSet lands = make_landscapes(
      cfg, params.n_traits, job.point, landscape_seed(spec.base_seed, job.point, job.landscape_idx));
  Rng rng(params.seed);
  return run_hill_climber(params, cfg, lands, rng);
}

// ---------------------------------------------------------------------------
// Worker pool

// Run fn(0..count-1) on `workers` threads. Work items only write to their
// own index in caller-owned storage, so results cannot depend on schedule.
// The first exception thrown by any item is rethrown after the pool drains.
template <typename Fn>
inline void parallel_for(std::size_t count, int workers, Fn&& fn) {
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::mutex error_lock;
  std::exception_ptr first_error;
  auto drain = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> hold(error_lock);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------
// CSV output

inline constexpr const char* kRunCsvHeader =
    "scenario,B,K,C,landscape_idx,run_idx,generation,fitness,epi_nodes,dev_steps";
inline constexpr const char* kSummaryCsvHeader =
    "scenario,B,K,C,runs,fit_mean,fit_min,fit_max,epi_mean,epi_min,epi_max,d_mean,d_min,d_max";

// Shortest round-trip decimal form, so equal doubles always print the same
// bytes and re-parsing restores the exact value.
inline std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

// 1-based generations kept in the run CSV: every record_stride-th plus the
// final one.
inline std::vector<int> recorded_generations(int generations, int stride) {
  std::vector<int> gens;
  for (int g = stride; g <= generations; g += stride) gens.push_back(g);
  if (gens.empty() || gens.back() != generations) gens.push_back(generations);
  return gens;
}

namespace detail {

inline std::string format_run_rows(const ExperimentSpec& spec, const RunJob& job,
                                   const RunRecord& rec) {
  std::string prefix = scenario_name(spec.scenario.kind);
  prefix += ',';
  prefix += std::to_string(job.point.b) + ',' + std::to_string(job.point.k) + ',' +
            std::to_string(job.point.c) + ',' + std::to_string(job.landscape_idx) + ',' +
            std::to_string(job.run_idx) + ',';
  std::string rows;
  for (int gen : recorded_generations(static_cast<int>(rec.series.size()), spec.record_stride)) {
    const GenerationStat& stat = rec.series[static_cast<std::size_t>(gen - 1)];
    rows += prefix + std::to_string(gen) + ',' + format_double(stat.fitness) + ',' +
            std::to_string(stat.epi_nodes) + ',' + std::to_string(stat.dev_steps) + '\n';
  }
  return rows;
}

inline std::string format_summary_row(const ExperimentSpec& spec, const ParamPoint& pt,
                                      const SummaryStats& s) {
  std::string row = scenario_name(spec.scenario.kind);
  row += ',';
  row += std::to_string(pt.b) + ',' + std::to_string(pt.k) + ',' + std::to_string(pt.c) + ',' +
         std::to_string(s.runs) + ',' + format_double(s.fit_mean) + ',' + format_double(s.fit_min) +
         ',' + format_double(s.fit_max) + ',' + format_double(s.epi_mean) + ',' +
         std::to_string(s.epi_min) + ',' + std::to_string(s.epi_max) + ',' +
         format_double(s.d_mean) + ',' + std::to_string(s.d_min) + ',' + std::to_string(s.d_max) +
         '\n';
  return row;
}

}  // namespace detail

// Called once per finished run, possibly from a worker thread; the caller
// must provide its own synchronization when workers > 1.
using RunObserver = std::function<void(const RunJob&, const RunRecord&)>;

// Execute the full sweep and write runs.csv and summary.csv under
// spec.output_dir. Output files are opened before any computation so a bad
// output path fails immediately. Identical (spec, base_seed) produce
// byte-identical files for any worker count.
inline void cmd_run(const ExperimentSpec& spec, int workers = 1,
                    const RunObserver& observer = {}) {
  const std::filesystem::path dir(spec.output_dir);
  std::error_code dir_err;
  std::filesystem::create_directories(dir, dir_err);
  std::ofstream runs_file(dir / "runs.csv", std::ios::binary);
  std::ofstream summary_file(dir / "summary.csv", std::ios::binary);
  if (!runs_file || !summary_file)
    throw std::runtime_error("cannot open output files under \"" + spec.output_dir + "\"");

  const std::vector<ParamPoint> points = sweep_points(spec);
  const std::vector<RunJob> jobs = sweep_jobs(spec);
  const std::size_t jobs_per_point =
      static_cast<std::size_t>(spec.landscapes_per_point) *
      static_cast<std::size_t>(spec.runs_per_landscape);

  std::vector<std::string> row_blocks(jobs.size());
  std::vector<GenerationStat> finals(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t idx) {
    const RunJob& job = jobs[idx];
    RunRecord rec = execute_run(spec, job);
    row_blocks[idx] = detail::format_run_rows(spec, job, rec);
    finals[idx] = rec.series.back();
    if (observer) observer(job, rec);
  });

  runs_file << kRunCsvHeader << '\n';
  for (const std::string& block : row_blocks) runs_file << block;
  summary_file << kSummaryCsvHeader << '\n';
  for (std::size_t p = 0; p < points.size(); ++p) {
    const std::vector<GenerationStat> point_finals(
        finals.begin() + static_cast<std::ptrdiff_t>(p * jobs_per_point),
        finals.begin() + static_cast<std::ptrdiff_t>((p + 1) * jobs_per_point));
    summary_file << detail::format_summary_row(spec, points[p], aggregate_finals(point_finals));
  }
  if (!runs_file.flush() || !summary_file.flush())
    throw std::runtime_error("failed writing output files under \"" + spec.output_dir + "\"");
}

// ---------------------------------------------------------------------------
// Comparing two run files

// Final-generation samples for one parameter point, ordered by
// (landscape_idx, run_idx).
struct PointSamples {
  std::vector<double> fitness;
  std::vector<double> epi_nodes;
  std::vector<double> dev_steps;
};

using RunTable = std::map<ParamPoint, PointSamples>;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline int parse_int_field(const std::string& field, const std::string& path) {
  int value = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw std::invalid_argument(path + ": bad integer field \"" + field + "\"");
  return value;
}

inline double parse_double_field(const std::string& field, const std::string& path) {
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw std::invalid_argument(path + ": bad numeric field \"" + field + "\"");
  return value;
}

}  // namespace detail

// Load a runs.csv and keep, per parameter point, each run's last recorded
// generation.
inline RunTable load_run_csv(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open \"" + path + "\"");
  std::string line;
  if (!std::getline(file, line)) throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRunCsvHeader)
    throw std::invalid_argument(path + ": not a run CSV (unexpected header)");

  struct FinalRow {
    int generation = -1;
    double fitness = 0.0;
    double epi_nodes = 0.0;
    double dev_steps = 0.0;
  };
  std::map<ParamPoint, std::map<std::pair<int, int>, FinalRow>> rows;
  while (std::getline(file, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != 10) throw std::invalid_argument(path + ": wrong column count");
    const ParamPoint pt{detail::parse_int_field(fields[1], path),
                        detail::parse_int_field(fields[2], path),
                        detail::parse_int_field(fields[3], path)};
    const std::pair<int, int> run_key{detail::parse_int_field(fields[4], path),
                                      detail::parse_int_field(fields[5], path)};
    const int generation = detail::parse_int_field(fields[6], path);
    FinalRow& slot = rows[pt][run_key];
    if (generation <= slot.generation) continue;
    slot.generation = generation;
    slot.fitness = detail::parse_double_field(fields[7], path);
    slot.epi_nodes = detail::parse_double_field(fields[8], path);
    slot.dev_steps = detail::parse_double_field(fields[9], path);
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no data rows");

  RunTable table;
  for (auto& [pt, runs] : rows) {
    PointSamples samples;
    for (auto& [key, row] : runs) {
      samples.fitness.push_back(row.fitness);
      samples.epi_nodes.push_back(row.epi_nodes);
      samples.dev_steps.push_back(row.dev_steps);
    }
    table.emplace(pt, std::move(samples));
  }
  return table;
}

struct CompareRow {
  ParamPoint point;
  int runs_a = 0;
  int runs_b = 0;
  double fit_mean_a = 0.0, fit_mean_b = 0.0;
  WelchResult fit_test;
  double epi_mean_a = 0.0, epi_mean_b = 0.0;
  WelchResult epi_test;
};

inline constexpr double kSignificanceLevel = 0.05;

// Per-point Welch tests between two run tables covering the same points.
inline std::vector<CompareRow> compare_tables(const RunTable& a, const RunTable& b) {
  std::string missing;
  for (const auto& [pt, samples] : a)
    if (!b.count(pt))
      missing += " (B=" + std::to_string(pt.b) + ",K=" + std::to_string(pt.k) +
                 ",C=" + std::to_string(pt.c) + ")";
  for (const auto& [pt, samples] : b)
    if (!a.count(pt))
      missing += " (B=" + std::to_string(pt.b) + ",K=" + std::to_string(pt.k) +
                 ",C=" + std::to_string(pt.c) + ")";
  if (!missing.empty())
    throw std::invalid_argument("compare: parameter points not in both inputs:" + missing);

  std::vector<CompareRow> report;
  for (const auto& [pt, sa] : a) {
    const PointSamples& sb = b.at(pt);
    CompareRow row;
    row.point = pt;
    row.runs_a = static_cast<int>(sa.fitness.size());
    row.runs_b = static_cast<int>(sb.fitness.size());
    row.fit_mean_a = detail::sample_mean(sa.fitness);
    row.fit_mean_b = detail::sample_mean(sb.fitness);
    row.fit_test = welch_t_test(sa.fitness, sb.fitness);
    row.epi_mean_a = detail::sample_mean(sa.epi_nodes);
    row.epi_mean_b = detail::sample_mean(sb.epi_nodes);
    row.epi_test = welch_t_test(sa.epi_nodes, sb.epi_nodes);
    report.push_back(row);
  }
  return report;
}

inline std::vector<CompareRow> cmd_compare(const std::string& run_csv_a,
                                           const std::string& run_csv_b) {
  return compare_tables(load_run_csv(run_csv_a), load_run_csv(run_csv_b));
}

inline constexpr const char* kCompareCsvHeader =
    "B,K,C,runs_a,runs_b,fit_mean_a,fit_mean_b,fit_t,fit_p,fit_significant,"
    "epi_mean_a,epi_mean_b,epi_t,epi_p,epi_significant";

inline std::string format_compare_csv(const std::vector<CompareRow>& rows) {
  std::string out = kCompareCsvHeader;
  out += '\n';
  for (const CompareRow& row : rows) {
    out += std::to_string(row.point.b) + ',' + std::to_string(row.point.k) + ',' +
           std::to_string(row.point.c) + ',' + std::to_string(row.runs_a) + ',' +
           std::to_string(row.runs_b) + ',' + format_double(row.fit_mean_a) + ',' +
           format_double(row.fit_mean_b) + ',' + format_double(row.fit_test.t) + ',' +
           format_double(row.fit_test.p) + ',' +
           (row.fit_test.p < kSignificanceLevel ? "1" : "0") + ',' +
           format_double(row.epi_mean_a) + ',' + format_double(row.epi_mean_b) + ',' +
           format_double(row.epi_test.t) + ',' + format_double(row.epi_test.p) + ',' +
           (row.epi_test.p < kSignificanceLevel ? "1" : "0") + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Attractor survey

struct AttractorRow {
  int b = 0;
  int genome_idx = 0;
  CycleReport report;
};

// Cycle length with truncated runs counted at the horizon (a lower bound).
inline int effective_cycle_length(const CycleReport& report, int horizon) {
  return report.truncated ? horizon : report.cycle_length;
}

// Sample random genomes per connectivity value and measure their attractors
// under a constant all-zero input.
inline std::vector<AttractorRow> attractor_survey(const EvolutionParams& base,
                                                  const std::vector<int>& b_list,
                                                  int genomes_per_b, int horizon,
                                                  std::uint64_t seed) {
  if (genomes_per_b < 1) throw std::invalid_argument("attractor_survey: need at least one genome");
  std::vector<AttractorRow> rows;
  const std::vector<std::uint8_t> input(static_cast<std::size_t>(base.n_traits), 0);
  for (int b : b_list) {
    EvolutionParams params = base;
    params.b_connectivity = b;
    for (int idx = 0; idx < genomes_per_b; ++idx) {
      Rng rng(mix_seed(seed, {detail::kAttractorTag, static_cast<std::uint64_t>(b),
                              static_cast<std::uint64_t>(idx)}));
      const Genome g = random_genome(rng, params);
      rows.push_back({b, idx, detect_cycle(g, input, horizon)});
    }
  }
  return rows;
}

inline double median_cycle_length(const std::vector<AttractorRow>& rows, int b, int horizon) {
  std::vector<int> lengths;
  for (const AttractorRow& row : rows)
    if (row.b == b) lengths.push_back(effective_cycle_length(row.report, horizon));
  if (lengths.empty()) throw std::invalid_argument("median_cycle_length: no rows for that B");
  std::sort(lengths.begin(), lengths.end());
  const std::size_t mid = lengths.size() / 2;
  if (lengths.size() % 2 == 1) return lengths[mid];
  return 0.5 * (lengths[mid - 1] + lengths[mid]);
}

}  // namespace epirbn
