#include "dihedra/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dihedra {

namespace {

constexpr double kDegenerate = 1e-12;

std::string edge_name(int a, int b) {
  std::ostringstream os;
  os << "(" << a << "," << b << ")";
  return os.str();
}

}  // namespace

void EdgeList::finalize(int nv) {
  nv_ = static_cast<std::uint64_t>(nv) + 1;
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  lookup_.clear();
  lookup_.reserve(edges.size() * 2);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    lookup_[key(edges[e].a, edges[e].b)] = e;
}

EdgeList build_edges(const Eigen::MatrixX3i& F, int nv) {
  EdgeList list;
  std::unordered_map<std::uint64_t, int> slot;
  auto key = [&](int a, int b) {
    return static_cast<std::uint64_t>(a) * (static_cast<std::uint64_t>(nv) + 1) + b;
  };
  slot.reserve(F.rows() * 3);
  for (int f = 0; f < F.rows(); ++f) {
    for (int c = 0; c < 3; ++c) {
      int i = F(f, c), j = F(f, (c + 1) % 3);
      if (i == j)
        throw MeshError(MeshError::Kind::Degenerate,
                        "face " + std::to_string(f) + " repeats vertex " +
                            std::to_string(i));
      if (i < 0 || j < 0 || i >= nv || j >= nv)
        throw MeshError(MeshError::Kind::Parse,
                        "face " + std::to_string(f) + " references vertex out of range");
      int a = std::min(i, j), b = std::max(i, j);
      auto it = slot.find(key(a, b));
      int e;
      if (it == slot.end()) {
        e = static_cast<int>(list.edges.size());
        slot[key(a, b)] = e;
        list.edges.push_back({a, b, -1, -1});
      } else {
        e = it->second;
      }
      int& side = (i < j) ? list.edges[e].left : list.edges[e].right;
      if (side != -1)
        throw MeshError(MeshError::Kind::NonManifold,
                        "edge " + edge_name(a, b) + " has more than two incident faces (faces " +
                            std::to_string(side) + ", " + std::to_string(f) +
                            " induce the same halfedge orientation)");
      side = f;
    }
  }
  std::vector<std::string> open;
  for (const Edge& e : list.edges)
    if (e.left == -1 || e.right == -1) open.push_back(edge_name(e.a, e.b));
  if (!open.empty()) {
    std::ostringstream os;
    os << "open boundary: " << open.size() << " boundary edge"
       << (open.size() == 1 ? "" : "s");
    for (const auto& s : open) os << " " << s;
    throw MeshError(MeshError::Kind::OpenBoundary, os.str());
  }
  list.finalize(nv);
  return list;
}

EdgeList build_edges(const TriMesh& mesh) { return build_edges(mesh.F, mesh.nv()); }

TopologyReport validate_topology(const TriMesh& mesh) {
  TopologyReport rep;
  const int nv = mesh.nv();
  rep.vertices = nv;
  rep.faces = mesh.nf();
  rep.manifold = true;
  rep.closed = true;

  // Tolerant halfedge scan: count incidences per undirected pair and per
  // direction so every defect can be reported at once.
  struct Slot {
    std::vector<int> fwd, rev;  // faces inducing (a->b) and (b->a)
  };
  std::unordered_map<std::uint64_t, Slot> slots;
  auto key = [&](int a, int b) {
    return static_cast<std::uint64_t>(a) * (static_cast<std::uint64_t>(nv) + 1) + b;
  };
  for (int f = 0; f < mesh.F.rows(); ++f) {
    for (int c = 0; c < 3; ++c) {
      int i = mesh.F(f, c), j = mesh.F(f, (c + 1) % 3);
      if (i == j || i < 0 || j < 0 || i >= nv || j >= nv) {
        rep.manifold = false;
        rep.offending.push_back("face " + std::to_string(f) + " is malformed");
        continue;
      }
      int a = std::min(i, j), b = std::max(i, j);
      Slot& s = slots[key(a, b)];
      (i < j ? s.fwd : s.rev).push_back(f);
    }
  }
  rep.edges = static_cast<int>(slots.size());
  rep.euler = rep.vertices - rep.edges + rep.faces;
  for (auto& [k, s] : slots) {
    int a = static_cast<int>(k / (static_cast<std::uint64_t>(nv) + 1));
    int b = static_cast<int>(k % (static_cast<std::uint64_t>(nv) + 1));
    int total = static_cast<int>(s.fwd.size() + s.rev.size());
    if (total > 2 || s.fwd.size() > 1 || s.rev.size() > 1) {
      rep.manifold = false;
      std::ostringstream os;
      os << "edge " << edge_name(a, b) << ": " << total << " incident faces [";
      std::vector<int> all(s.fwd);
      all.insert(all.end(), s.rev.begin(), s.rev.end());
      std::sort(all.begin(), all.end());
      for (size_t i = 0; i < all.size(); ++i) os << (i ? "," : "") << all[i];
      os << "]";
      rep.offending.push_back(os.str());
    } else if (total < 2) {
      rep.closed = false;
      rep.offending.push_back("edge " + edge_name(a, b) + ": boundary (1 incident face)");
    }
  }

  // Vertex-link check: the star of each vertex must be one cycle.
  if (rep.manifold && rep.closed) {
    std::unordered_map<std::uint64_t, int> next;
    std::vector<int> degree(nv, 0);
    for (int f = 0; f < mesh.F.rows(); ++f)
      for (int c = 0; c < 3; ++c)
        next[key(mesh.F(f, c), mesh.F(f, (c + 1) % 3))] = mesh.F(f, (c + 2) % 3);
    for (auto& [k, s] : slots) {
      int a = static_cast<int>(k / (static_cast<std::uint64_t>(nv) + 1));
      int b = static_cast<int>(k % (static_cast<std::uint64_t>(nv) + 1));
      ++degree[a];
      ++degree[b];
    }
    for (int i = 0; i < nv && rep.manifold; ++i) {
      if (degree[i] == 0) {
        rep.manifold = false;
        rep.offending.push_back("vertex " + std::to_string(i) + " is isolated");
        break;
      }
      int start = -1;
      for (auto& [k, v] : next)
        if (static_cast<int>(k / (static_cast<std::uint64_t>(nv) + 1)) == i) {
          start = static_cast<int>(k % (static_cast<std::uint64_t>(nv) + 1));
          break;
        }
      int cur = start, steps = 0;
      do {
        auto it = next.find(key(i, cur));
        if (it == next.end()) break;
        cur = it->second;
        ++steps;
      } while (cur != start && steps <= degree[i]);
      if (cur != start || steps != degree[i]) {
        rep.manifold = false;
        rep.offending.push_back("vertex " + std::to_string(i) +
                                ": star is not a single cycle");
      }
    }
  }
  return rep;
}

std::vector<std::vector<int>> vertex_rings(const Eigen::MatrixX3i& F, int nv,
                                           const EdgeList& edges) {
  std::unordered_map<std::uint64_t, int> next;
  auto key = [&](int a, int b) {
    return static_cast<std::uint64_t>(a) * (static_cast<std::uint64_t>(nv) + 1) + b;
  };
  next.reserve(F.rows() * 3);
  for (int f = 0; f < F.rows(); ++f)
    for (int c = 0; c < 3; ++c)
      next[key(F(f, c), F(f, (c + 1) % 3))] = F(f, (c + 2) % 3);

  std::vector<std::vector<int>> nbrs(nv);
  for (const Edge& e : edges.edges) {
    nbrs[e.a].push_back(e.b);
    nbrs[e.b].push_back(e.a);
  }
  std::vector<std::vector<int>> rings(nv);
  for (int i = 0; i < nv; ++i) {
    if (nbrs[i].empty())
      throw MeshError(MeshError::Kind::NonManifold,
                      "vertex " + std::to_string(i) + " is isolated");
    int start = *std::min_element(nbrs[i].begin(), nbrs[i].end());
    int cur = start;
    std::vector<int>& ring = rings[i];
    do {
      ring.push_back(cur);
      auto it = next.find(key(i, cur));
      if (it == next.end())
        throw MeshError(MeshError::Kind::NonManifold,
                        "vertex " + std::to_string(i) + ": star is not a single cycle");
      cur = it->second;
    } while (cur != start && ring.size() <= nbrs[i].size());
    if (cur != start || ring.size() != nbrs[i].size())
      throw MeshError(MeshError::Kind::NonManifold,
                      "vertex " + std::to_string(i) + ": star is not a single cycle");
  }
  return rings;
}

MeshTopology MeshTopology::from_faces(const Eigen::MatrixX3i& F, int nv) {
  MeshTopology t;
  t.nv = nv;
  t.F = F;
  t.edges = build_edges(F, nv);
  t.rings = vertex_rings(F, nv, t.edges);
  return t;
}

int corner_of(const Eigen::MatrixX3i& F, int f, int v) {
  for (int c = 0; c < 3; ++c)
    if (F(f, c) == v) return c;
  return -1;
}

double rms_edge_length(const TriMesh& mesh, const EdgeList& edges) {
  double s = 0;
  for (const Edge& e : edges.edges)
    s += (mesh.V.row(e.a) - mesh.V.row(e.b)).squaredNorm();
  return std::sqrt(s / std::max<size_t>(1, edges.edges.size()));
}

Eigen::VectorXd edge_lengths(const TriMesh& mesh, const EdgeList& edges) {
  Eigen::VectorXd l(edges.count());
  for (int e = 0; e < edges.count(); ++e)
    l[e] = (mesh.V.row(edges[e].a) - mesh.V.row(edges[e].b)).norm();
  double rms = std::sqrt(l.squaredNorm() / std::max<int>(1, edges.count()));
  for (int e = 0; e < edges.count(); ++e)
    if (l[e] < kDegenerate * rms)
      throw MeshError(MeshError::Kind::Degenerate,
                      "edge " + edge_name(edges[e].a, edges[e].b) + " has near-zero length");
  return l;
}

namespace {

void check_face_area(const TriMesh& mesh, int f, double rms) {
  Eigen::Vector3d u = mesh.V.row(mesh.F(f, 1)) - mesh.V.row(mesh.F(f, 0));
  Eigen::Vector3d v = mesh.V.row(mesh.F(f, 2)) - mesh.V.row(mesh.F(f, 0));
  if (0.5 * u.cross(v).norm() < kDegenerate * rms * rms)
    throw MeshError(MeshError::Kind::Degenerate,
                    "face " + std::to_string(f) + " is degenerate (near-zero area)");
}

double mesh_rms(const TriMesh& mesh) {
  double s = 0;
  int n = 0;
  for (int f = 0; f < mesh.F.rows(); ++f)
    for (int c = 0; c < 3; ++c) {
      s += (mesh.V.row(mesh.F(f, c)) - mesh.V.row(mesh.F(f, (c + 1) % 3))).squaredNorm();
      ++n;
    }
  return std::sqrt(s / std::max(1, n));
}

}  // namespace

Eigen::VectorXd inner_angles(const TriMesh& mesh) {
  const double rms = mesh_rms(mesh);
  Eigen::VectorXd beta(mesh.nf() * 3);
  for (int f = 0; f < mesh.nf(); ++f) {
    check_face_area(mesh, f, rms);
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d u = mesh.V.row(mesh.F(f, (c + 1) % 3)) - mesh.V.row(mesh.F(f, c));
      Eigen::Vector3d v = mesh.V.row(mesh.F(f, (c + 2) % 3)) - mesh.V.row(mesh.F(f, c));
      beta[3 * f + c] = std::atan2(u.cross(v).norm(), u.dot(v));
    }
  }
  return beta;
}

Eigen::MatrixX3d face_normals(const TriMesh& mesh) {
  const double rms = mesh_rms(mesh);
  Eigen::MatrixX3d N(mesh.nf(), 3);
  for (int f = 0; f < mesh.nf(); ++f) {
    check_face_area(mesh, f, rms);
    Eigen::Vector3d u = mesh.V.row(mesh.F(f, 1)) - mesh.V.row(mesh.F(f, 0));
    Eigen::Vector3d v = mesh.V.row(mesh.F(f, 2)) - mesh.V.row(mesh.F(f, 0));
    N.row(f) = u.cross(v).normalized();
  }
  return N;
}

Eigen::VectorXd dihedral_angles(const TriMesh& mesh, const EdgeList& edges) {
  const Eigen::MatrixX3d N = face_normals(mesh);
  Eigen::VectorXd alpha(edges.count());
  for (int e = 0; e < edges.count(); ++e) {
    const Edge& ed = edges[e];
    Eigen::Vector3d ehat = (mesh.V.row(ed.b) - mesh.V.row(ed.a)).normalized();
    Eigen::Vector3d nl = N.row(ed.left), nr = N.row(ed.right);
    double a = std::numbers::pi - std::atan2(nl.cross(nr).dot(ehat), nl.dot(nr));
    alpha[e] = a;
  }
  return alpha;
}

double verify_normal_cotangent_identity(const TriMesh& mesh) {
  double worst = 0;
  for (int f = 0; f < mesh.nf(); ++f) {
    Eigen::Vector3d p0 = mesh.V.row(mesh.F(f, 0));
    Eigen::Vector3d p1 = mesh.V.row(mesh.F(f, 1));
    Eigen::Vector3d p2 = mesh.V.row(mesh.F(f, 2));
    Eigen::Vector3d n = (p1 - p0).cross(p2 - p0).normalized();
    for (int c = 0; c < 3; ++c) {
      Eigen::Vector3d u = mesh.V.row(mesh.F(f, (c + 1) % 3)) - mesh.V.row(mesh.F(f, c));
      Eigen::Vector3d v = mesh.V.row(mesh.F(f, (c + 2) % 3)) - mesh.V.row(mesh.F(f, c));
      Eigen::Vector3d cr = u.cross(v);
      double cot = u.dot(v) / cr.norm();
      double scale = u.norm() * v.norm();
      worst = std::max(worst, (cot * cr - u.dot(v) * n).norm() / scale);
    }
  }
  return worst;
}

TriMesh normalize_pose(const TriMesh& mesh, const TriMesh* reference) {
  TriMesh out = mesh;
  out.V.rowwise() -= out.V.colwise().mean();
  EdgeList edges = build_edges(out);
  Eigen::VectorXd l = edge_lengths(out, edges);
  double rms = std::sqrt(l.squaredNorm() / l.size());
  if (rms <= 0)
    throw MeshError(MeshError::Kind::Degenerate, "mesh has zero scale");
  out.V /= rms;
  if (reference) {
    if (reference->nv() != mesh.nv() || reference->F != mesh.F)
      throw MeshError(MeshError::Kind::Mismatch,
                      "reference mesh topology does not match");
    Eigen::MatrixX3d R = reference->V;
    R.rowwise() -= R.colwise().mean();
    Eigen::Matrix3d H = out.V.transpose() * R;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d U = svd.matrixU(), V = svd.matrixV();
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    D(2, 2) = (V * U.transpose()).determinant() < 0 ? -1.0 : 1.0;
    Eigen::Matrix3d Q = V * D * U.transpose();
    out.V = (Q * out.V.transpose()).transpose();
  }
  return out;
}

}  // namespace dihedra
