#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "epirbn/evolution.hpp"
#include "epirbn/network.hpp"
#include "epirbn/rng.hpp"
#include "epirbn/scenarios.hpp"

namespace epirbn {

// ---------------------------------------------------------------------------
// Attractor detection

struct CycleReport {
  int transient = 0;      // steps before the repeating block starts
  int cycle_length = 0;   // 0 only when truncated
  bool truncated = false; // horizon hit without a revisit
};

namespace detail {

// The full dynamical state is (states, methylated); both go into the
// fingerprint so a methylation difference counts as a different state.
inline std::vector<std::uint64_t> pack_state(const CellState& s) {
  const std::size_t r = s.states.size();
  const std::size_t words = (2 * r + 63) / 64;
  std::vector<std::uint64_t> packed(words, 0);
  for (std::size_t i = 0; i < r; ++i) {
    if (s.states[i]) packed[i / 64] |= std::uint64_t{1} << (i % 64);
    const std::size_t j = r + i;
    if (s.methylated[i]) packed[j / 64] |= std::uint64_t{1} << (j % 64);
  }
  return packed;
}

struct PackedStateHash {
  std::size_t operator()(const std::vector<std::uint64_t>& key) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (std::uint64_t w : key) h = splitmix64(h ^ w);
    return static_cast<std::size_t>(h);
  }
};

}  // namespace detail

// Iterate from the genome start states under a constant input until a state
// repeats. Reports the transient (first-visit time of the revisited state)
// and the cycle length; if the horizon passes without a revisit the report
// is truncated with cycle_length 0 and transient = horizon.
inline CycleReport detect_cycle(const Genome& g, const std::vector<std::uint8_t>& input,
                                int horizon) {
  if (horizon < 1) throw std::invalid_argument("detect_cycle: horizon must be >= 1");
  CellState cur = init_state(g, nullptr, true);
  CellState next;
  std::unordered_map<std::vector<std::uint64_t>, int, detail::PackedStateHash> first_seen;
  first_seen.emplace(detail::pack_state(cur), 0);
  for (int t = 1; t <= horizon; ++t) {
    step_cell_into(g, cur, input, nullptr, next);
    std::swap(cur, next);
    auto [it, fresh] = first_seen.emplace(detail::pack_state(cur), t);
    if (!fresh) return {it->second, t - it->second, false};
  }
  return {horizon, 0, true};
}

// ---------------------------------------------------------------------------
// Methylation rhythm

struct NodeIntervals {
  int node = 0;
  std::vector<int> on_intervals;   // consecutive suppressed stretches
  std::vector<int> off_intervals;  // consecutive free stretches
};

// Run-length view of every epigenetic node's suppression signal across the
// scored window. The signal tracks the mechanism, not the raw mark: a node
// is counted as on while it is held at state 0, which includes the release
// cycle after the mark drops, so marks that refire within a cycle of
// clearing merge into one continuous on stretch. Only complete intervals
// count: a run must be bounded by an observed switch on both sides, so the
// window-clipped leading and trailing runs are discarded and a node that
// never switches contributes nothing. Histograms pool interval lengths
// over all nodes.
struct EpiActivityStats {
  int window = 0;
  std::vector<NodeIntervals> nodes;
  std::map<int, int> on_histogram;
  std::map<int, int> off_histogram;
};

inline EpiActivityStats epi_activity(const Genome& g, const ActivityTrace& trace) {
  if (trace.snapshots.size() < 2)
    throw std::invalid_argument("epi_activity: trace has no scored cycles");
  EpiActivityStats stats;
  stats.window = static_cast<int>(trace.snapshots.size()) - 1;
  for (int i = 0; i < g.r(); ++i) {
    if (!g.nodes[static_cast<std::size_t>(i)].epi_flag || g.is_input(i)) continue;
    NodeIntervals node_iv;
    node_iv.node = i;
    bool seen_switch = false;
    int run_length = 0;
    std::uint8_t run_value = 0;
    for (int t = 1; t <= stats.window; ++t) {
      const auto idx = static_cast<std::size_t>(i);
      const std::uint8_t suppressed = static_cast<std::uint8_t>(
          trace.snapshots[static_cast<std::size_t>(t)].methylated[idx] ||
          trace.snapshots[static_cast<std::size_t>(t - 1)].methylated[idx]);
      if (run_length == 0 || suppressed == run_value) {
        run_value = suppressed;
        ++run_length;
        continue;
      }
      if (seen_switch)
        (run_value ? node_iv.on_intervals : node_iv.off_intervals).push_back(run_length);
      seen_switch = true;
      run_value = suppressed;
      run_length = 1;
    }
    for (int len : node_iv.on_intervals) stats.on_histogram[len] += 1;
    for (int len : node_iv.off_intervals) stats.off_histogram[len] += 1;
    stats.nodes.push_back(std::move(node_iv));
  }
  return stats;
}

// Most common on/off interval length among nodes that actually switch.
// Ties go to the smaller length; 0 means no complete interval was seen.
inline int modal_switching_interval(const EpiActivityStats& stats) {
  std::map<int, int> pooled;
  for (const auto& [len, count] : stats.on_histogram) pooled[len] += count;
  for (const auto& [len, count] : stats.off_histogram) pooled[len] += count;
  int best_len = 0;
  int best_count = 0;
  for (const auto& [len, count] : pooled) {
    if (count > best_count) {
      best_len = len;
      best_count = count;
    }
  }
  return best_len;
}

// ---------------------------------------------------------------------------
// Welch's t-test

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  bool degenerate = false;  // both samples had zero variance
};

namespace detail {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Continued fraction for the regularized incomplete beta function,
// evaluated with Lentz's algorithm.
inline double beta_cont_fraction(double a, double b, double x) {
  constexpr double tiny = 1e-30;
  constexpr double eps = 3e-16;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double coef = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + coef * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + coef / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    coef = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + coef * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + coef / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < eps) break;
  }
  return h;
}

inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  // Use the fraction on whichever side converges fast, mirroring for the other.
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cont_fraction(a, b, x) / a;
  return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

inline double sample_mean(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs, double mean) {
  double sum = 0.0;
  for (double x : xs) sum += (x - mean) * (x - mean);
  return sum / static_cast<double>(xs.size() - 1);
}

}  // namespace detail

// Unequal-variance two-sample t-test with Satterthwaite degrees of freedom.
// The two-tailed p comes from the t-distribution tail via the regularized
// incomplete beta: p = I_{df/(df+t^2)}(df/2, 1/2). Two zero-variance
// samples are degenerate: p = 1 when the means agree, p = 0 otherwise.
inline WelchResult welch_t_test(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2 || ys.size() < 2)
    throw std::invalid_argument("welch_t_test: each sample needs at least two values");
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double mx = detail::sample_mean(xs);
  const double my = detail::sample_mean(ys);
  const double vx = detail::sample_variance(xs, mx);
  const double vy = detail::sample_variance(ys, my);
  const double se2 = vx / nx + vy / ny;
  WelchResult res;
  if (se2 == 0.0) {
    res.degenerate = true;
    if (mx == my) return res;  // t = 0, p = 1
    res.t = mx > my ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
    res.p = 0.0;
    return res;
  }
  res.t = (mx - my) / std::sqrt(se2);
  res.df = se2 * se2 /
           ((vx / nx) * (vx / nx) / (nx - 1.0) + (vy / ny) * (vy / ny) / (ny - 1.0));
  res.p = detail::reg_inc_beta(res.df / 2.0, 0.5, res.df / (res.df + res.t * res.t));
  return res;
}

// ---------------------------------------------------------------------------
// Run aggregation

struct SummaryStats {
  int runs = 0;
  double fit_mean = 0.0, fit_min = 0.0, fit_max = 0.0;
  double epi_mean = 0.0;
  int epi_min = 0, epi_max = 0;
  double d_mean = 0.0;
  int d_min = 0, d_max = 0;
};

// Mean/min/max of each final-generation statistic across runs.
inline SummaryStats aggregate_finals(const std::vector<GenerationStat>& finals) {
  if (finals.empty()) throw std::invalid_argument("aggregate: no runs");
  SummaryStats s;
  s.runs = static_cast<int>(finals.size());
  bool first = true;
  for (const GenerationStat& last : finals) {
    s.fit_mean += last.fitness;
    s.epi_mean += last.epi_nodes;
    s.d_mean += last.dev_steps;
    if (first) {
      s.fit_min = s.fit_max = last.fitness;
      s.epi_min = s.epi_max = last.epi_nodes;
      s.d_min = s.d_max = last.dev_steps;
      first = false;
      continue;
    }
    s.fit_min = std::min(s.fit_min, last.fitness);
    s.fit_max = std::max(s.fit_max, last.fitness);
    s.epi_min = std::min(s.epi_min, last.epi_nodes);
    s.epi_max = std::max(s.epi_max, last.epi_nodes);
    s.d_min = std::min(s.d_min, last.dev_steps);
    s.d_max = std::max(s.d_max, last.dev_steps);
  }
  s.fit_mean /= s.runs;
  s.epi_mean /= s.runs;
  s.d_mean /= s.runs;
  return s;
}

inline SummaryStats aggregate(const std::vector<RunRecord>& records) {
  if (records.empty()) throw std::invalid_argument("aggregate: no runs");
  std::vector<GenerationStat> finals;
  finals.reserve(records.size());
  for (const RunRecord& rec : records) {
    if (rec.series.empty()) throw std::invalid_argument("aggregate: run has an empty series");
    finals.push_back(rec.series.back());
  }
  return aggregate_finals(finals);
}

}  // namespace epirbn
