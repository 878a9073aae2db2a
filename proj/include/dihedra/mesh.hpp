#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dihedra {

// Closed oriented triangle mesh. Faces are CCW as seen from outside.
struct TriMesh {
  Eigen::MatrixX3d V;
  Eigen::MatrixX3i F;

  int nv() const { return static_cast<int>(V.rows()); }
  int nf() const { return static_cast<int>(F.rows()); }
};

struct MeshError : std::runtime_error {
  enum class Kind {
    Io,
    Parse,
    NonManifold,
    OpenBoundary,
    NonSpherical,
    Degenerate,
    SingularCorner,
    Infeasible,
    Mismatch,
    Solver,
  };
  Kind kind;
  MeshError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Undirected edge a<b. `left` is the face containing the halfedge a->b,
// `right` the face containing b->a.
struct Edge {
  int a, b, left, right;
};

class EdgeList {
 public:
  std::vector<Edge> edges;  // sorted lexicographically by (a, b)

  int count() const { return static_cast<int>(edges.size()); }
  const Edge& operator[](int e) const { return edges[e]; }

  // Index of the undirected edge {i, j}; -1 if absent.
  int index(int i, int j) const {
    auto it = lookup_.find(key(std::min(i, j), std::max(i, j)));
    return it == lookup_.end() ? -1 : it->second;
  }

  // Face containing the directed halfedge i->j; -1 if absent.
  int face_of_halfedge(int i, int j) const {
    int e = index(i, j);
    if (e < 0) return -1;
    return i < j ? edges[e].left : edges[e].right;
  }

  void finalize(int nv);  // sorts + builds the lookup

 private:
  std::uint64_t key(int a, int b) const {
    return static_cast<std::uint64_t>(a) * nv_ + static_cast<std::uint64_t>(b);
  }
  std::uint64_t nv_ = 0;
  std::unordered_map<std::uint64_t, int> lookup_;
};

struct TopologyReport {
  int vertices = 0, edges = 0, faces = 0;
  int euler = 0;
  bool manifold = false;
  bool closed = false;
  std::vector<std::string> offending;

  bool valid() const { return manifold && closed && euler == 2; }
};

// Face list + derived connectivity, positions not required.
struct MeshTopology {
  int nv = 0;
  Eigen::MatrixX3i F;
  EdgeList edges;
  std::vector<std::vector<int>> rings;  // CCW one-rings, starting at the
                                        // smallest-index neighbor

  static MeshTopology from_faces(const Eigen::MatrixX3i& F, int nv);
  static MeshTopology of(const TriMesh& mesh) { return from_faces(mesh.F, mesh.nv()); }
};

// Throws MeshError (NonManifold / OpenBoundary) if the face list is not a
// closed oriented 2-manifold.
EdgeList build_edges(const Eigen::MatrixX3i& F, int nv);
EdgeList build_edges(const TriMesh& mesh);

// Never throws; collects every defect into the report.
TopologyReport validate_topology(const TriMesh& mesh);

// CCW one-rings. Throws if a vertex star is not a single cycle.
std::vector<std::vector<int>> vertex_rings(const Eigen::MatrixX3i& F, int nv,
                                           const EdgeList& edges);

// Corner slot (0..2) of vertex v in face f; -1 if absent.
int corner_of(const Eigen::MatrixX3i& F, int f, int v);

Eigen::VectorXd edge_lengths(const TriMesh& mesh, const EdgeList& edges);

// Inner angles per (face, corner), length 3F, indexed 3*f + corner.
Eigen::VectorXd inner_angles(const TriMesh& mesh);

Eigen::MatrixX3d face_normals(const TriMesh& mesh);

// Interior dihedral per canonical edge, range (0, 2pi); pi = coplanar,
// < pi convex, > pi reflex.
Eigen::VectorXd dihedral_angles(const TriMesh& mesh, const EdgeList& edges);

// Max over corners of the residual of the cotangent/normal identity
// cot(beta) * (u x v) == (u . v) * n_hat, relative to the corner scale |u||v|.
double verify_normal_cotangent_identity(const TriMesh& mesh);

// Centroid to origin, RMS edge length to 1; optionally rotate by the
// orthogonal Procrustes optimum onto `reference` (det +1 enforced).
TriMesh normalize_pose(const TriMesh& mesh, const TriMesh* reference = nullptr);

// RMS edge length (degeneracy thresholds are relative to this).
double rms_edge_length(const TriMesh& mesh, const EdgeList& edges);

}  // namespace dihedra
