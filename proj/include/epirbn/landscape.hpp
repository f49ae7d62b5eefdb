#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "epirbn/rng.hpp"

namespace epirbn {

// NK fitness landscape: n binary traits, each interacting with k others.
// Every trait owns a lookup table of 2^(k+1) uniform-random fitness values;
// the genotype fitness is the per-trait table sum normalised by n.
//
// Table indexing convention: the trait's own bit is the most significant
// index bit, followed by its neighbours in stored order (neighbors[i][0]
// next, the last neighbour least significant).
struct NkLandscape {
  int n = 0;
  int k = 0;
  std::vector<std::vector<int>> neighbors;    // per trait, k distinct non-self indices
  std::vector<std::vector<double>> tables;    // per trait, 2^(k+1) values in [0,1)
};

// Coevolutionary NKCS landscape: each trait additionally depends on c traits
// in each of s partner genomes. Tables hold 2^(k+1+c*s) entries; index bits
// are [own, k locals, partner 1's c externals, ..., partner s's c externals],
// own bit most significant.
struct NkcsLandscape {
  int n = 0;
  int k = 0;
  int c = 0;
  int s = 0;
  std::vector<std::vector<int>> local_neighbors;                  // per trait, k indices
  std::vector<std::vector<std::vector<int>>> external_neighbors;  // per trait, per partner, c indices
  std::vector<std::vector<double>> tables;                        // per trait, 2^(k+1+c*s)
};

namespace detail {

// k distinct indices from [0, n), excluding `self` when self >= 0.
inline std::vector<int> draw_distinct(Rng& rng, int count, int n, int self) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    const int candidate = rng.index(static_cast<std::size_t>(n));
    if (candidate == self) continue;
    bool taken = false;
    for (int existing : out) {
      if (existing == candidate) {
        taken = true;
        break;
      }
    }
    if (!taken) out.push_back(candidate);
  }
  return out;
}

}  // namespace detail

namespace detail {

inline void check_neighbor_list(const std::vector<int>& list, std::size_t count, int n, int self,
                                const char* what) {
  if (list.size() != count) throw std::invalid_argument(std::string(what) + ": wrong neighbor count");
  for (std::size_t a = 0; a < list.size(); ++a) {
    if (list[a] < 0 || list[a] >= n)
      throw std::invalid_argument(std::string(what) + ": neighbor index out of range");
    if (list[a] == self) throw std::invalid_argument(std::string(what) + ": self neighbor");
    for (std::size_t b = a + 1; b < list.size(); ++b)
      if (list[b] == list[a]) throw std::invalid_argument(std::string(what) + ": duplicate neighbor");
  }
}

inline void check_table(const std::vector<double>& table, std::size_t rows, const char* what) {
  if (table.size() != rows) throw std::invalid_argument(std::string(what) + ": wrong table size");
  for (double v : table)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument(std::string(what) + ": table value outside [0, 1]");
}

}  // namespace detail

inline void validate_landscape(const NkLandscape& land) {
  if (land.n < 1) throw std::invalid_argument("nk landscape: n must be >= 1");
  if (land.k < 0 || land.k >= land.n) throw std::invalid_argument("nk landscape: require 0 <= k <= n-1");
  if (static_cast<int>(land.neighbors.size()) != land.n ||
      static_cast<int>(land.tables.size()) != land.n)
    throw std::invalid_argument("nk landscape: per-trait arrays must have n entries");
  const std::size_t rows = std::size_t{1} << (land.k + 1);
  for (int i = 0; i < land.n; ++i) {
    detail::check_neighbor_list(land.neighbors[static_cast<std::size_t>(i)],
                                static_cast<std::size_t>(land.k), land.n, i, "nk landscape");
    detail::check_table(land.tables[static_cast<std::size_t>(i)], rows, "nk landscape");
  }
}

inline void validate_landscape(const NkcsLandscape& land) {
  if (land.n < 1) throw std::invalid_argument("nkcs landscape: n must be >= 1");
  if (land.k < 0 || land.k >= land.n)
    throw std::invalid_argument("nkcs landscape: require 0 <= k <= n-1");
  if (land.c < 0 || land.c > land.n) throw std::invalid_argument("nkcs landscape: require 0 <= c <= n");
  if (land.s < 0) throw std::invalid_argument("nkcs landscape: require s >= 0");
  if (static_cast<int>(land.local_neighbors.size()) != land.n ||
      static_cast<int>(land.external_neighbors.size()) != land.n ||
      static_cast<int>(land.tables.size()) != land.n)
    throw std::invalid_argument("nkcs landscape: per-trait arrays must have n entries");
  const std::size_t rows = std::size_t{1} << (land.k + 1 + land.c * land.s);
  for (int i = 0; i < land.n; ++i) {
    detail::check_neighbor_list(land.local_neighbors[static_cast<std::size_t>(i)],
                                static_cast<std::size_t>(land.k), land.n, i, "nkcs landscape");
    const auto& per_partner = land.external_neighbors[static_cast<std::size_t>(i)];
    if (static_cast<int>(per_partner.size()) != land.s)
      throw std::invalid_argument("nkcs landscape: wrong partner count");
    for (const auto& externals : per_partner)
      detail::check_neighbor_list(externals, static_cast<std::size_t>(land.c), land.n, -1,
                                  "nkcs landscape");
    detail::check_table(land.tables[static_cast<std::size_t>(i)], rows, "nkcs landscape");
  }
}

inline NkLandscape generate_nk(Rng& rng, int n, int k) {
  if (n < 1) throw std::invalid_argument("generate_nk: n must be >= 1");
  if (k < 0 || k >= n) throw std::invalid_argument("generate_nk: require 0 <= k <= n-1");
  NkLandscape land;
  land.n = n;
  land.k = k;
  land.neighbors.resize(static_cast<std::size_t>(n));
  land.tables.resize(static_cast<std::size_t>(n));
  const std::size_t rows = std::size_t{1} << (k + 1);
  for (int i = 0; i < n; ++i) {
    land.neighbors[static_cast<std::size_t>(i)] = detail::draw_distinct(rng, k, n, i);
    auto& table = land.tables[static_cast<std::size_t>(i)];
    table.resize(rows);
    for (auto& value : table) value = rng.unit();
  }
  return land;
}

inline NkcsLandscape generate_nkcs(Rng& rng, int n, int k, int c, int s) {
  if (n < 1) throw std::invalid_argument("generate_nkcs: n must be >= 1");
  if (k < 0 || k >= n) throw std::invalid_argument("generate_nkcs: require 0 <= k <= n-1");
  if (c < 0 || c > n) throw std::invalid_argument("generate_nkcs: require 0 <= c <= n");
  if (s < 0) throw std::invalid_argument("generate_nkcs: require s >= 0");
  NkcsLandscape land;
  land.n = n;
  land.k = k;
  land.c = c;
  land.s = s;
  land.local_neighbors.resize(static_cast<std::size_t>(n));
  land.external_neighbors.resize(static_cast<std::size_t>(n));
  land.tables.resize(static_cast<std::size_t>(n));
  const std::size_t rows = std::size_t{1} << (k + 1 + c * s);
  for (int i = 0; i < n; ++i) {
    land.local_neighbors[static_cast<std::size_t>(i)] = detail::draw_distinct(rng, k, n, i);
    auto& per_partner = land.external_neighbors[static_cast<std::size_t>(i)];
    per_partner.resize(static_cast<std::size_t>(s));
    for (int p = 0; p < s; ++p)
      per_partner[static_cast<std::size_t>(p)] = detail::draw_distinct(rng, c, n, -1);
    auto& table = land.tables[static_cast<std::size_t>(i)];
    table.resize(rows);
    for (auto& value : table) value = rng.unit();
  }
  return land;
}

inline double nk_fitness(const NkLandscape& land, const std::vector<std::uint8_t>& traits) {
  if (static_cast<int>(traits.size()) != land.n)
    throw std::invalid_argument("nk_fitness: trait vector length does not match n");
  double sum = 0.0;
  for (int i = 0; i < land.n; ++i) {
    std::size_t idx = traits[static_cast<std::size_t>(i)];
    for (int nb : land.neighbors[static_cast<std::size_t>(i)])
      idx = (idx << 1) | traits[static_cast<std::size_t>(nb)];
    sum += land.tables[static_cast<std::size_t>(i)][idx];
  }
  return sum / static_cast<double>(land.n);
}

// S=1 fast path for evaluation loops: no per-call allocation. `own` and
// `partner` must point at n trait bits each.
inline double nkcs_fitness_s1(const NkcsLandscape& land, const std::uint8_t* own,
                              const std::uint8_t* partner) {
  if (land.s != 1) throw std::invalid_argument("nkcs_fitness_s1: landscape does not have s = 1");
  double sum = 0.0;
  for (int i = 0; i < land.n; ++i) {
    std::size_t idx = own[i];
    for (int nb : land.local_neighbors[static_cast<std::size_t>(i)])
      idx = (idx << 1) | own[nb];
    for (int nb : land.external_neighbors[static_cast<std::size_t>(i)][0])
      idx = (idx << 1) | partner[nb];
    sum += land.tables[static_cast<std::size_t>(i)][idx];
  }
  return sum / static_cast<double>(land.n);
}

inline double nkcs_fitness(const NkcsLandscape& land,
                           const std::vector<std::uint8_t>& own,
                           const std::vector<std::vector<std::uint8_t>>& partners) {
  if (static_cast<int>(own.size()) != land.n)
    throw std::invalid_argument("nkcs_fitness: own vector length does not match n");
  if (static_cast<int>(partners.size()) != land.s)
    throw std::invalid_argument("nkcs_fitness: expected exactly s partner vectors");
  for (const auto& partner : partners)
    if (static_cast<int>(partner.size()) != land.n)
      throw std::invalid_argument("nkcs_fitness: partner vector length does not match n");
  double sum = 0.0;
  for (int i = 0; i < land.n; ++i) {
    std::size_t idx = own[static_cast<std::size_t>(i)];
    for (int nb : land.local_neighbors[static_cast<std::size_t>(i)])
      idx = (idx << 1) | own[static_cast<std::size_t>(nb)];
    for (int p = 0; p < land.s; ++p) {
      const auto& partner = partners[static_cast<std::size_t>(p)];
      for (int nb : land.external_neighbors[static_cast<std::size_t>(i)][static_cast<std::size_t>(p)])
        idx = (idx << 1) | partner[static_cast<std::size_t>(nb)];
    }
    sum += land.tables[static_cast<std::size_t>(i)][idx];
  }
  return sum / static_cast<double>(land.n);
}

}  // namespace epirbn
