#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "epirbn/landscape.hpp"
#include "epirbn/network.hpp"

namespace epirbn {

enum class ScenarioKind { static_single, switching, multicell };

// Which switching-scenario environment a life starts in. Offspring run the
// reverse order of their parent, so the evolution loop flips this flag on
// every replacement.
enum class PhaseOrder { a_first, b_first };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::static_single;
  int cycles = 100;  // scored update cycles per lifetime
  bool heritable = false;
  bool reset_states = true;
  bool heterogeneous_landscapes = false;  // multicell: distinct mother/daughter landscapes
  bool development_enabled = false;
  bool record_trace = false;
};

// Per-cycle snapshots of one cell across the scored window. snapshots[0] is
// the state entering the window (after any development cycles) and
// snapshots[t] the state after scored cycle t.
struct ActivityTrace {
  std::vector<CellState> snapshots;
};

struct EvalResult {
  double fitness = 0.0;
  std::vector<CellState> finals;      // one ending state per cell
  std::vector<ActivityTrace> traces;  // filled only when cfg.record_trace
};

// One switching-scenario environment: a uniform input string (all copies of
// input_bit) tied to the landscape that scores it. The pair travels as a
// unit when lives run the environments in reverse order.
struct SwitchEnv {
  std::uint8_t input_bit = 0;
  const NkLandscape* land = nullptr;
};

// Everything a scenario evaluation may draw fitness from. Which entries must
// be present depends on the scenario kind.
struct LandscapeSet {
  std::optional<NkLandscape> nk_a;
  std::optional<NkLandscape> nk_b;      // switching: second environment
  std::optional<NkcsLandscape> nkcs_m;  // multicell: mother
  std::optional<NkcsLandscape> nkcs_d;  // multicell: daughter
};

// Single cell, constant all-zero input, one NK landscape. Runs g.dev_steps
// unscored warm-up cycles, then cfg.cycles scored cycles; fitness is the
// mean of the per-cycle trait lookups.
inline EvalResult eval_static_single(const Genome& g, const NkLandscape& land,
                                     const CellState* inherited, const ScenarioConfig& cfg) {
  if (cfg.cycles < 1) throw std::invalid_argument("eval: cycles must be >= 1");
  if (land.n != g.n_traits)
    throw std::invalid_argument("eval: landscape size does not match trait count");
  const std::size_t n = static_cast<std::size_t>(g.n_traits);
  CellState cur = init_state(g, inherited, cfg.reset_states);
  CellState next;
  const std::vector<std::uint8_t> input(n, 0);
  std::vector<std::uint8_t> traits(n);
  for (int t = 0; t < g.dev_steps; ++t) {
    step_cell_into(g, cur, input, nullptr, next);
    std::swap(cur, next);
  }
  EvalResult res;
  ActivityTrace trace;
  if (cfg.record_trace) trace.snapshots.push_back(cur);
  double sum = 0.0;
  for (int t = 0; t < cfg.cycles; ++t) {
    step_cell_into(g, cur, input, nullptr, next);
    std::swap(cur, next);
    trait_bits_into(g, cur, traits.data(), static_cast<int>(n));
    sum += nk_fitness(land, traits);
    if (cfg.record_trace) trace.snapshots.push_back(cur);
  }
  res.fitness = sum / static_cast<double>(cfg.cycles);
  res.finals.push_back(std::move(cur));
  if (cfg.record_trace) res.traces.push_back(std::move(trace));
  return res;
}

// Single cell whose life is split between two environments: the first half
// of the scored cycles runs in one (uniform input, its landscape), the
// second half in the other. `order` chooses which comes first; state and
// methylation carry continuously across the mid-life switch. Development
// cycles, if any, run under the first environment's input.
inline EvalResult eval_switching(const Genome& g, const SwitchEnv& env_a, const SwitchEnv& env_b,
                                 PhaseOrder order, const CellState* inherited,
                                 const ScenarioConfig& cfg) {
  if (cfg.cycles < 2 || cfg.cycles % 2 != 0)
    throw std::invalid_argument("eval: switching needs a positive even cycle count");
  if (!env_a.land || !env_b.land)
    throw std::invalid_argument("eval: switching needs both environments");
  if (env_a.land->n != g.n_traits || env_b.land->n != g.n_traits)
    throw std::invalid_argument("eval: landscape size does not match trait count");
  const SwitchEnv& first = (order == PhaseOrder::a_first) ? env_a : env_b;
  const SwitchEnv& second = (order == PhaseOrder::a_first) ? env_b : env_a;
  const std::size_t n = static_cast<std::size_t>(g.n_traits);
  const std::vector<std::uint8_t> input_first(n, first.input_bit);
  const std::vector<std::uint8_t> input_second(n, second.input_bit);
  CellState cur = init_state(g, inherited, cfg.reset_states);
  CellState next;
  std::vector<std::uint8_t> traits(n);
  for (int t = 0; t < g.dev_steps; ++t) {
    step_cell_into(g, cur, input_first, nullptr, next);
    std::swap(cur, next);
  }
  EvalResult res;
  ActivityTrace trace;
  if (cfg.record_trace) trace.snapshots.push_back(cur);
  double sum = 0.0;
  const int half = cfg.cycles / 2;
  for (int t = 0; t < cfg.cycles; ++t) {
    const bool in_first = t < half;
    step_cell_into(g, cur, in_first ? input_first : input_second, nullptr, next);
    std::swap(cur, next);
    trait_bits_into(g, cur, traits.data(), static_cast<int>(n));
    sum += nk_fitness(in_first ? *first.land : *second.land, traits);
    if (cfg.record_trace) trace.snapshots.push_back(cur);
  }
  res.fitness = sum / static_cast<double>(cfg.cycles);
  res.finals.push_back(std::move(cur));
  if (cfg.record_trace) res.traces.push_back(std::move(trace));
  return res;
}

// Two clones of one genome on coupled landscapes, updated in strict
// alternation: each macro-cycle the mother steps reading the daughter's
// pre-step traits through the partner ports, then the daughter steps
// reading the mother's just-updated traits. Both cells are clamped to
// all-zero input. After g.dev_steps unscored macro-cycles, each scored
// macro-cycle contributes the mean of the two cells' coupled lookups.
inline EvalResult eval_multicell(const Genome& g, const NkcsLandscape& land_m,
                                 const NkcsLandscape& land_d, const CellState* inherited_m,
                                 const CellState* inherited_d, const ScenarioConfig& cfg) {
  if (cfg.cycles < 1) throw std::invalid_argument("eval: cycles must be >= 1");
  if (land_m.s != 1 || land_d.s != 1)
    throw std::invalid_argument("eval: multicell supports exactly one partner (s = 1)");
  if (land_m.n != g.n_traits || land_d.n != g.n_traits)
    throw std::invalid_argument("eval: landscape size does not match trait count");
  const std::size_t n = static_cast<std::size_t>(g.n_traits);
  CellState m_cur = init_state(g, inherited_m, cfg.reset_states);
  CellState d_cur = init_state(g, inherited_d, cfg.reset_states);
  CellState m_next, d_next;
  const std::vector<std::uint8_t> input(n, 0);
  std::vector<std::uint8_t> m_traits(n), d_traits(n);
  auto macro_cycle = [&] {
    trait_bits_into(g, d_cur, d_traits.data(), static_cast<int>(n));
    step_cell_into(g, m_cur, input, d_traits.data(), m_next);
    std::swap(m_cur, m_next);
    trait_bits_into(g, m_cur, m_traits.data(), static_cast<int>(n));
    step_cell_into(g, d_cur, input, m_traits.data(), d_next);
    std::swap(d_cur, d_next);
    trait_bits_into(g, d_cur, d_traits.data(), static_cast<int>(n));
  };
  for (int t = 0; t < g.dev_steps; ++t) macro_cycle();
  EvalResult res;
  ActivityTrace trace_m, trace_d;
  if (cfg.record_trace) {
    trace_m.snapshots.push_back(m_cur);
    trace_d.snapshots.push_back(d_cur);
  }
  double sum = 0.0;
  for (int t = 0; t < cfg.cycles; ++t) {
    macro_cycle();
    sum += 0.5 * (nkcs_fitness_s1(land_m, m_traits.data(), d_traits.data()) +
                  nkcs_fitness_s1(land_d, d_traits.data(), m_traits.data()));
    if (cfg.record_trace) {
      trace_m.snapshots.push_back(m_cur);
      trace_d.snapshots.push_back(d_cur);
    }
  }
  res.fitness = sum / static_cast<double>(cfg.cycles);
  res.finals.push_back(std::move(m_cur));
  res.finals.push_back(std::move(d_cur));
  if (cfg.record_trace) {
    res.traces.push_back(std::move(trace_m));
    res.traces.push_back(std::move(trace_d));
  }
  return res;
}

// Uniform entry point used by the evolution loop. `inherited` carries the
// parent's final CellStates (one per cell) when epigenetic inheritance is
// active; `order` only matters for the switching scenario.
inline EvalResult evaluate_scenario(const Genome& g, const ScenarioConfig& cfg,
                                    const LandscapeSet& lands, PhaseOrder order,
                                    const std::vector<CellState>* inherited) {
  const CellState* cell0 = (inherited && !inherited->empty()) ? &(*inherited)[0] : nullptr;
  switch (cfg.kind) {
    case ScenarioKind::static_single:
      if (!lands.nk_a) throw std::invalid_argument("evaluate: static scenario needs a landscape");
      return eval_static_single(g, *lands.nk_a, cell0, cfg);
    case ScenarioKind::switching: {
      if (!lands.nk_a || !lands.nk_b)
        throw std::invalid_argument("evaluate: switching scenario needs two landscapes");
      const SwitchEnv env_a{0, &*lands.nk_a};
      const SwitchEnv env_b{1, &*lands.nk_b};
      return eval_switching(g, env_a, env_b, order, cell0, cfg);
    }
    case ScenarioKind::multicell: {
      if (!lands.nkcs_m || !lands.nkcs_d)
        throw std::invalid_argument("evaluate: multicell scenario needs both cell landscapes");
      const CellState* cell1 = (inherited && inherited->size() > 1) ? &(*inherited)[1] : nullptr;
      return eval_multicell(g, *lands.nkcs_m, *lands.nkcs_d, cell0, cell1, cfg);
    }
  }
  throw std::logic_error("evaluate: unhandled scenario kind");
}

}  // namespace epirbn
