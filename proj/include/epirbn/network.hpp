#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace epirbn {

// Connectivity cap. Truth tables are packed into 32-bit words, which holds
// the 2^B function rows and the 2^B' control rows for B = B' <= 5.
inline constexpr int kMaxConnectivity = 5;

// One network node. Every node carries the epigenetic control fields even
// while epi_flag is 0, so toggling the flag back on re-exposes the previous
// control wiring instead of inventing a new one.
struct NodeGene {
  std::uint8_t start_state = 0;
  std::uint8_t epi_flag = 0;
  std::uint32_t function_table = 0;  // bit p = next state for input pattern p
  std::uint32_t epi_table = 0;       // bit p = methylate on control pattern p
  std::array<std::uint16_t, kMaxConnectivity> inputs{};
  std::array<std::uint16_t, kMaxConnectivity> epi_inputs{};
};

// Complete heritable description of a network: R node genes plus the
// development-phase length D. Node roles are fixed by index: nodes
// 0..N-1 are clamped to the environmental input, nodes N..2N-1 double as
// partner ports in two-cell runs, and the last N nodes are the traits
// scored on the fitness landscape.
struct Genome {
  std::vector<NodeGene> nodes;
  int n_traits = 0;        // N (the input-node count N' equals N)
  int b_connectivity = 0;  // B, also the control connectivity B'
  int dev_steps = 0;       // D, unscored warm-up cycles before scoring

  int r() const { return static_cast<int>(nodes.size()); }
  bool is_input(int i) const { return i < n_traits; }
  int partner_port_id(int j) const { return n_traits + j; }
  int trait_id(int j) const { return r() - n_traits + j; }

  int epi_node_count() const {
    int count = 0;
    for (const NodeGene& gene : nodes) count += gene.epi_flag ? 1 : 0;
    return count;
  }
};

// Full dynamical state of one cell. The methylation bits are part of the
// state proper: a methylated node is suppressed (state 0) until released.
struct CellState {
  std::vector<std::uint8_t> states;
  std::vector<std::uint8_t> methylated;
};

// Structural checks applied to generated or deserialized genomes. Step
// functions do not re-validate, so hand-built test fixtures may bend these
// rules deliberately.
inline void validate_genome(const Genome& g) {
  if (g.b_connectivity < 1 || g.b_connectivity > kMaxConnectivity)
    throw std::invalid_argument("genome: connectivity must be in [1, 5]");
  if (g.n_traits < 0) throw std::invalid_argument("genome: trait count must be >= 0");
  if (g.n_traits > 0 && g.r() < 3 * g.n_traits)
    throw std::invalid_argument("genome: need R >= 3N so input, port and trait nodes stay disjoint");
  if (g.dev_steps < 0) throw std::invalid_argument("genome: dev_steps must be >= 0");
  const int b = g.b_connectivity;
  const int rows = 1 << b;
  for (int i = 0; i < g.r(); ++i) {
    const NodeGene& gene = g.nodes[static_cast<std::size_t>(i)];
    if (rows < 32 && ((gene.function_table >> rows) != 0 || (gene.epi_table >> rows) != 0))
      throw std::invalid_argument("genome: truth table has bits beyond 2^B rows");
    for (const auto* set : {&gene.inputs, &gene.epi_inputs}) {
      for (int a = 0; a < b; ++a) {
        const int src = (*set)[static_cast<std::size_t>(a)];
        if (src >= g.r()) throw std::invalid_argument("genome: connection target out of range");
        if (src == i) throw std::invalid_argument("genome: self-connection not allowed");
        for (int c = a + 1; c < b; ++c)
          if ((*set)[static_cast<std::size_t>(c)] == src)
            throw std::invalid_argument("genome: duplicate connection target");
      }
    }
  }
}

// Build the state a new life starts from. Without inheritance every node
// takes its genome start state with methylation clear. With inheritance the
// methylation marks carry over (masked off nodes that are no longer
// epigenetic), and the node states carry over too unless reset_states asks
// for genome start states. Methylated nodes are forced to 0 either way.
inline CellState init_state(const Genome& g, const CellState* inherited, bool reset_states) {
  const std::size_t r = static_cast<std::size_t>(g.r());
  if (inherited && (inherited->states.size() != r || inherited->methylated.size() != r))
    throw std::invalid_argument("init_state: inherited state length does not match genome");
  CellState s;
  s.states.resize(r);
  s.methylated.resize(r);
  for (std::size_t i = 0; i < r; ++i) {
    const NodeGene& gene = g.nodes[i];
    std::uint8_t st = gene.start_state;
    std::uint8_t meth = 0;
    if (inherited) {
      if (!reset_states) st = inherited->states[i];
      if (gene.epi_flag && !g.is_input(static_cast<int>(i))) meth = inherited->methylated[i];
    }
    if (meth) st = 0;
    s.states[i] = st;
    s.methylated[i] = meth;
  }
  return s;
}

// One synchronous update, written into a caller-owned buffer so evaluation
// loops can ping-pong two states without allocating. All reads come from
// `cur`; `next` is resized and fully overwritten. Per node, in priority
// order: input nodes are clamped to input_bits; an epigenetic node whose
// control pattern fires (or that is currently methylated) is held at 0,
// picking up or dropping the mark; everything else takes its Boolean
// function of the time-t inputs. When partner_traits is given, connection
// slot 0 of each partner-port node reads the partner's trait bit instead of
// its local source; control connections always read locally.
inline void step_cell_into(const Genome& g, const CellState& cur,
                           const std::vector<std::uint8_t>& input_bits,
                           const std::uint8_t* partner_traits, CellState& next) {
  const int r = g.r();
  if (static_cast<int>(cur.states.size()) != r || static_cast<int>(cur.methylated.size()) != r)
    throw std::invalid_argument("step_cell: state length does not match genome");
  if (static_cast<int>(input_bits.size()) != g.n_traits)
    throw std::invalid_argument("step_cell: expected one input bit per input node");
  if (&cur == &next) throw std::invalid_argument("step_cell: cur and next must be distinct buffers");
  next.states.resize(static_cast<std::size_t>(r));
  next.methylated.resize(static_cast<std::size_t>(r));
  const int b = g.b_connectivity;
  for (int i = 0; i < g.n_traits; ++i) {
    next.states[static_cast<std::size_t>(i)] = input_bits[static_cast<std::size_t>(i)];
    next.methylated[static_cast<std::size_t>(i)] = 0;
  }
  for (int i = g.n_traits; i < r; ++i) {
    const NodeGene& gene = g.nodes[static_cast<std::size_t>(i)];
    if (gene.epi_flag) {
      std::uint32_t control = 0;
      for (int slot = 0; slot < b; ++slot)
        control = (control << 1) | cur.states[gene.epi_inputs[static_cast<std::size_t>(slot)]];
      const std::uint8_t mark = static_cast<std::uint8_t>((gene.epi_table >> control) & 1u);
      if (cur.methylated[static_cast<std::size_t>(i)] || mark) {
        // Covers all three suppressed transitions: acquiring the mark,
        // holding it, and the release cycle where the state stays 0 once
        // more before normal updating resumes.
        next.methylated[static_cast<std::size_t>(i)] = mark;
        next.states[static_cast<std::size_t>(i)] = 0;
        continue;
      }
    }
    std::uint32_t pattern = 0;
    for (int slot = 0; slot < b; ++slot) {
      std::uint8_t bit = cur.states[gene.inputs[static_cast<std::size_t>(slot)]];
      if (slot == 0 && partner_traits && i < 2 * g.n_traits)
        bit = partner_traits[i - g.n_traits];
      pattern = (pattern << 1) | bit;
    }
    next.states[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>((gene.function_table >> pattern) & 1u);
    next.methylated[static_cast<std::size_t>(i)] = 0;
  }
}

inline CellState step_cell(const Genome& g, const CellState& s,
                           const std::vector<std::uint8_t>& input_bits,
                           const std::uint8_t* partner_traits = nullptr) {
  CellState next;
  step_cell_into(g, s, input_bits, partner_traits, next);
  return next;
}

// `count` must equal g.n_traits; it is passed by value so the store loop has
// a bound the optimizer can tie to the caller's buffer size.
inline void trait_bits_into(const Genome& g, const CellState& s, std::uint8_t* out, int count) {
  const int base = g.r() - count;
  for (int j = 0; j < count; ++j) out[j] = s.states[static_cast<std::size_t>(base + j)];
}

inline std::vector<std::uint8_t> trait_bits(const Genome& g, const CellState& s) {
  const int n = g.n_traits;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(n));
  trait_bits_into(g, s, out.data(), n);
  return out;
}

}  // namespace epirbn
