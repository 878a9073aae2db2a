#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dihedra/mesh.hpp"

namespace dihedra {

// %.17g — shortest representation that round-trips a double.
std::string g17(double x);

// Minimal CSV reader: comma-split rows, no quoting. Skips blank lines.
std::vector<std::vector<std::string>> read_csv(const std::string& path);

// Per-edge vector with header "edge_i,edge_j,<value_name>", one row per
// canonical edge.
void write_edge_csv(const std::string& path, const EdgeList& edges,
                    const Eigen::VectorXd& values, const std::string& value_name);

// Reads a per-edge CSV written as above; checks the (edge_i, edge_j) pairs
// against the expected canonical order.
Eigen::VectorXd read_edge_csv(const std::string& path, const EdgeList& edges);

}  // namespace dihedra
