#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "epirbn/landscape.hpp"
#include "epirbn/network.hpp"

// JSON dump/load for genomes and landscapes, used for debugging and test
// fixtures. Round-trips are value-exact: integers are stored as integers
// and doubles use the library's shortest round-trip formatting.

namespace epirbn {

namespace detail {

inline nlohmann::json connections_to_json(const std::array<std::uint16_t, kMaxConnectivity>& set,
                                          int b) {
  nlohmann::json arr = nlohmann::json::array();
  for (int slot = 0; slot < b; ++slot) arr.push_back(set[static_cast<std::size_t>(slot)]);
  return arr;
}

inline void connections_from_json(const nlohmann::json& arr, int b,
                                  std::array<std::uint16_t, kMaxConnectivity>& out) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != b)
    throw std::invalid_argument("genome json: connection list length does not match connectivity");
  for (int slot = 0; slot < b; ++slot)
    out[static_cast<std::size_t>(slot)] = arr.at(static_cast<std::size_t>(slot)).get<std::uint16_t>();
}

}  // namespace detail

inline nlohmann::json genome_to_json(const Genome& g) {
  nlohmann::json doc;
  doc["n_traits"] = g.n_traits;
  doc["b_connectivity"] = g.b_connectivity;
  doc["dev_steps"] = g.dev_steps;
  nlohmann::json nodes = nlohmann::json::array();
  for (const NodeGene& gene : g.nodes) {
    nlohmann::json node;
    node["start_state"] = static_cast<int>(gene.start_state);
    node["epi_flag"] = static_cast<int>(gene.epi_flag);
    node["function_table"] = gene.function_table;
    node["epi_table"] = gene.epi_table;
    node["inputs"] = detail::connections_to_json(gene.inputs, g.b_connectivity);
    node["epi_inputs"] = detail::connections_to_json(gene.epi_inputs, g.b_connectivity);
    nodes.push_back(std::move(node));
  }
  doc["nodes"] = std::move(nodes);
  return doc;
}

inline Genome genome_from_json(const nlohmann::json& doc) {
  Genome g;
  g.n_traits = doc.at("n_traits").get<int>();
  g.b_connectivity = doc.at("b_connectivity").get<int>();
  g.dev_steps = doc.at("dev_steps").get<int>();
  const nlohmann::json& nodes = doc.at("nodes");
  if (!nodes.is_array()) throw std::invalid_argument("genome json: nodes must be an array");
  g.nodes.reserve(nodes.size());
  for (const nlohmann::json& node : nodes) {
    NodeGene gene;
    gene.start_state = static_cast<std::uint8_t>(node.at("start_state").get<int>() & 1);
    gene.epi_flag = static_cast<std::uint8_t>(node.at("epi_flag").get<int>() & 1);
    gene.function_table = node.at("function_table").get<std::uint32_t>();
    gene.epi_table = node.at("epi_table").get<std::uint32_t>();
    detail::connections_from_json(node.at("inputs"), g.b_connectivity, gene.inputs);
    detail::connections_from_json(node.at("epi_inputs"), g.b_connectivity, gene.epi_inputs);
    g.nodes.push_back(gene);
  }
  validate_genome(g);
  return g;
}

inline nlohmann::json landscape_to_json(const NkLandscape& land) {
  nlohmann::json doc;
  doc["n"] = land.n;
  doc["k"] = land.k;
  doc["neighbors"] = land.neighbors;
  doc["tables"] = land.tables;
  return doc;
}

inline NkLandscape nk_landscape_from_json(const nlohmann::json& doc) {
  NkLandscape land;
  land.n = doc.at("n").get<int>();
  land.k = doc.at("k").get<int>();
  land.neighbors = doc.at("neighbors").get<std::vector<std::vector<int>>>();
  land.tables = doc.at("tables").get<std::vector<std::vector<double>>>();
  validate_landscape(land);
  return land;
}

inline nlohmann::json landscape_to_json(const NkcsLandscape& land) {
  nlohmann::json doc;
  doc["n"] = land.n;
  doc["k"] = land.k;
  doc["c"] = land.c;
  doc["s"] = land.s;
  doc["local_neighbors"] = land.local_neighbors;
  doc["external_neighbors"] = land.external_neighbors;
  doc["tables"] = land.tables;
  return doc;
}

inline NkcsLandscape nkcs_landscape_from_json(const nlohmann::json& doc) {
  NkcsLandscape land;
  land.n = doc.at("n").get<int>();
  land.k = doc.at("k").get<int>();
  land.c = doc.at("c").get<int>();
  land.s = doc.at("s").get<int>();
  land.local_neighbors = doc.at("local_neighbors").get<std::vector<std::vector<int>>>();
  land.external_neighbors =
      doc.at("external_neighbors").get<std::vector<std::vector<std::vector<int>>>>();
  land.tables = doc.at("tables").get<std::vector<std::vector<double>>>();
  validate_landscape(land);
  return land;
}

}  // namespace epirbn
