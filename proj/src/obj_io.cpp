#include "dihedra/obj_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "dihedra/csv_io.hpp"

namespace dihedra {

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw MeshError(MeshError::Kind::Io, "cannot open " + path);
  std::vector<Eigen::Vector3d> verts;
  std::vector<Eigen::Vector3i> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z))
        throw MeshError(MeshError::Kind::Parse,
                        path + ":" + std::to_string(lineno) + ": malformed vertex record");
      verts.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // accept v, v/vt, v//vn, v/vt/vn — the leading index is the vertex
        size_t slash = tok.find('/');
        std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        int v;
        try {
          v = std::stoi(head);
        } catch (...) {
          throw MeshError(MeshError::Kind::Parse,
                          path + ":" + std::to_string(lineno) + ": bad face index '" + tok + "'");
        }
        if (v < 0) v = static_cast<int>(verts.size()) + 1 + v;  // relative index
        if (v < 1 || v > static_cast<int>(verts.size()))
          throw MeshError(MeshError::Kind::Parse,
                          path + ":" + std::to_string(lineno) + ": face index " +
                              std::to_string(v) + " out of range");
        idx.push_back(v - 1);
      }
      if (idx.size() < 3)
        throw MeshError(MeshError::Kind::Parse,
                        path + ":" + std::to_string(lineno) + ": face with fewer than 3 vertices");
      for (size_t k = 1; k + 1 < idx.size(); ++k)  // fan from the first vertex
        faces.emplace_back(idx[0], idx[k], idx[k + 1]);
    }
    // all other record types ignored
  }
  if (verts.empty())
    throw MeshError(MeshError::Kind::Parse, path + ": no vertices");
  TriMesh mesh;
  mesh.V.resize(verts.size(), 3);
  for (size_t i = 0; i < verts.size(); ++i) mesh.V.row(i) = verts[i];
  mesh.F.resize(faces.size(), 3);
  for (size_t i = 0; i < faces.size(); ++i) mesh.F.row(i) = faces[i];

  // topology gate: closed manifold, sphere
  EdgeList edges = build_edges(mesh);  // throws NonManifold / OpenBoundary
  int euler = mesh.nv() - edges.count() + mesh.nf();
  if (euler != 2)
    throw MeshError(MeshError::Kind::NonSpherical,
                    path + ": Euler characteristic " + std::to_string(euler) +
                        " (expected 2): V=" + std::to_string(mesh.nv()) +
                        " E=" + std::to_string(edges.count()) +
                        " F=" + std::to_string(mesh.nf()));
  vertex_rings(mesh.F, mesh.nv(), edges);  // throws if a star is not one cycle
  return mesh;
}

void save_obj(const std::string& path, const TriMesh& mesh) {
  std::ofstream out(path);
  if (!out)
    throw MeshError(MeshError::Kind::Io, "cannot write " + path);
  for (int i = 0; i < mesh.nv(); ++i)
    out << "v " << g17(mesh.V(i, 0)) << " " << g17(mesh.V(i, 1)) << " "
        << g17(mesh.V(i, 2)) << "\n";
  for (int f = 0; f < mesh.nf(); ++f)
    out << "f " << mesh.F(f, 0) + 1 << " " << mesh.F(f, 1) + 1 << " "
        << mesh.F(f, 2) + 1 << "\n";
  if (!out)
    throw MeshError(MeshError::Kind::Io, "write failed: " + path);
}

}  // namespace dihedra
