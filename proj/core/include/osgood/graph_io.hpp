#pragma once

#include "osgood/graph.hpp"
#include "osgood/types.hpp"

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace osgood::io {

/// Loads a graph from an edge list (`src,dst,weight`, each undirected edge
/// once) and an optional measure file (`vertex,mass`; m = 1 when absent).
/// Vertices are ordered by first appearance in the edge list, followed by
/// vertices that only appear in the measure file. Malformed rows throw
/// InputError carrying the 1-based line number.
WeightedGraph read_graph(std::istream& edges, std::istream* measure = nullptr);
WeightedGraph read_graph(const std::filesystem::path& edges,
                         const std::optional<std::filesystem::path>& measure = std::nullopt);

void write_edge_list(std::ostream& out, const WeightedGraph& g);
void write_measure(std::ostream& out, const WeightedGraph& g);

/// Reads a `vertex,<column>` CSV into a vector indexed like `g`; vertices
/// missing from the file get `fill`.
Vector read_vertex_values(std::istream& in, const WeightedGraph& g, double fill = 0.0);
Vector read_vertex_values(const std::filesystem::path& path, const WeightedGraph& g,
                          double fill = 0.0);

/// Reads a two-column numeric CSV with the given header, e.g. `t,f`.
std::pair<std::vector<double>, std::vector<double>> read_two_columns(
    std::istream& in, const std::string& first, const std::string& second);
std::pair<std::vector<double>, std::vector<double>> read_two_columns(
    const std::filesystem::path& path, const std::string& first, const std::string& second);

}  // namespace osgood::io
