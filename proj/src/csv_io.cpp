#include "dihedra/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dihedra {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw MeshError(MeshError::Kind::Io, "cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.push_back("");
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_edge_csv(const std::string& path, const EdgeList& edges,
                    const Eigen::VectorXd& values, const std::string& value_name) {
  if (values.size() != edges.count())
    throw MeshError(MeshError::Kind::Mismatch, "value count does not match edge count");
  std::ofstream out(path);
  if (!out)
    throw MeshError(MeshError::Kind::Io, "cannot write " + path);
  out << "edge_i,edge_j," << value_name << "\n";
  for (int e = 0; e < edges.count(); ++e)
    out << edges[e].a << "," << edges[e].b << "," << g17(values[e]) << "\n";
}

Eigen::VectorXd read_edge_csv(const std::string& path, const EdgeList& edges) {
  auto rows = read_csv(path);
  if (rows.empty())
    throw MeshError(MeshError::Kind::Parse, path + ": empty csv");
  size_t start = 0;
  if (!rows[0].empty() && rows[0][0] == "edge_i") start = 1;  // header
  if (static_cast<int>(rows.size() - start) != edges.count())
    throw MeshError(MeshError::Kind::Mismatch,
                    path + ": expected " + std::to_string(edges.count()) + " rows, got " +
                        std::to_string(rows.size() - start));
  Eigen::VectorXd v(edges.count());
  for (int e = 0; e < edges.count(); ++e) {
    const auto& row = rows[start + e];
    if (row.size() < 3)
      throw MeshError(MeshError::Kind::Parse, path + ": short row " + std::to_string(e));
    int a, b;
    double x;
    try {
      a = std::stoi(row[0]);
      b = std::stoi(row[1]);
      x = std::stod(row[2]);
    } catch (...) {
      throw MeshError(MeshError::Kind::Parse, path + ": bad row " + std::to_string(e));
    }
    if (a != edges[e].a || b != edges[e].b)
      throw MeshError(MeshError::Kind::Mismatch,
                      path + ": row " + std::to_string(e) + " edge (" + std::to_string(a) +
                          "," + std::to_string(b) + ") does not match canonical order");
    v[e] = x;
  }
  return v;
}

}  // namespace dihedra
