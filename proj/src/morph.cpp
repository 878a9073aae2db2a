#include "dihedra/morph.hpp"

#include <Eigen/Geometry>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace dihedra {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix3d rot(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

// axis * angle of a rotation matrix; zero vector near the identity
Eigen::Vector3d log_rot(const Eigen::Matrix3d& R) {
  Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

// R^t for a rotation matrix (fractional power along the geodesic)
Eigen::Matrix3d rot_pow(const Eigen::Matrix3d& R, double t) {
  Eigen::Vector3d w = log_rot(R);
  double a = w.norm();
  if (a < 1e-15) return Eigen::Matrix3d::Identity();
  return rot(w / a, a * t);
}

Eigen::Matrix3d project_rotation(const Eigen::Matrix3d& A) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d U = svd.matrixU(), V = svd.matrixV();
  Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
  D(2, 2) = (U * V.transpose()).determinant() < 0 ? -1.0 : 1.0;
  return U * D * V.transpose();
}

// corner angle opposite `opp` between sides a, b (law of cosines)
double corner_from_lengths(double a, double b, double opp, int face) {
  double c = (a * a + b * b - opp * opp) / (2 * a * b);
  if (c < -1 - 1e-9 || c > 1 + 1e-9)
    throw MeshError(MeshError::Kind::Infeasible,
                    "face " + std::to_string(face) +
                        ": interpolated lengths violate the triangle inequality");
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// per-(face, corner) wedge angles from target edge lengths
Eigen::VectorXd wedge_angles(const MeshTopology& topo, const Eigen::VectorXd& lengths) {
  Eigen::VectorXd W(topo.F.rows() * 3);
  for (int f = 0; f < topo.F.rows(); ++f) {
    double l[3];  // l[c] = length of the edge opposite corner c
    for (int c = 0; c < 3; ++c)
      l[c] = lengths[topo.edges.index(topo.F(f, (c + 1) % 3), topo.F(f, (c + 2) % 3))];
    for (int c = 0; c < 3; ++c)
      W[3 * f + c] = corner_from_lengths(l[(c + 1) % 3], l[(c + 2) % 3], l[c], f);
  }
  return W;
}

}  // namespace

Eigen::VectorXd interpolate_dihedrals(const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& b, double t) {
  if (a.size() != b.size())
    throw MeshError(MeshError::Kind::Mismatch, "dihedral vector lengths differ");
  return (1 - t) * a + t * b;
}

Eigen::VectorXd interpolate_edge_lengths(const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b, double t,
                                         bool log_space) {
  if (a.size() != b.size())
    throw MeshError(MeshError::Kind::Mismatch, "length vector lengths differ");
  if (log_space)
    return ((1 - t) * a.array().log() + t * b.array().log()).exp().matrix();
  return (1 - t) * a + t * b;
}

StarLayout reconstruct_star(const MeshTopology& topo, int center,
                            const Eigen::VectorXd& lengths,
                            const Eigen::VectorXd& dihedrals) {
  const Eigen::VectorXd W = wedge_angles(topo, lengths);
  const auto& ring = topo.rings[center];
  const int m = static_cast<int>(ring.size());

  StarLayout star;
  star.center = center;
  star.ring = ring;

  // Wedge chain: start with spoke 0 along +x, wedge-0 normal +z; sweep each
  // wedge angle about the current normal, fold about each new spoke by
  // (dihedral - pi).
  std::vector<Eigen::Matrix3d> Wf(m + 1);
  Eigen::Vector3d d(1, 0, 0), n(0, 0, 1);
  auto frame = [](const Eigen::Vector3d& d, const Eigen::Vector3d& n) {
    Eigen::Matrix3d f;
    f.col(0) = d;
    f.col(1) = n.cross(d);
    f.col(2) = n;
    return f;
  };
  Wf[0] = frame(d, n);
  for (int s = 0; s < m; ++s) {
    int f = topo.edges.face_of_halfedge(center, ring[s]);
    double gamma = W[3 * f + corner_of(topo.F, f, center)];
    Eigen::Vector3d dn = rot(n, gamma) * d;
    int spoke = ring[(s + 1) % m];
    double delta = dihedrals[topo.edges.index(center, spoke)];
    n = rot(dn, delta - kPi) * n;
    d = dn;
    Wf[s + 1] = frame(d, n);
  }

  // closure defect P (wedge m should land back on wedge 0), distributed
  // uniformly: wedge s corrected by P^{-s/m} in the frame of wedge 0
  Eigen::Matrix3d P = Wf[0].transpose() * Wf[m];
  star.closure_defect = log_rot(P).norm();
  star.pts.resize(m, 3);
  for (int s = 0; s < m; ++s) {
    Eigen::Matrix3d A = Wf[0] * rot_pow(P, -static_cast<double>(s) / m) *
                        Wf[0].transpose() * Wf[s];
    star.pts.row(s) = A.col(0) * lengths[topo.edges.index(center, ring[s])];
  }
  return star;
}

Eigen::Matrix3d canonical_frame(const StarLayout& star) {
  const int m = static_cast<int>(star.ring.size());
  int s0 = 0;  // rings start at the smallest-index neighbor
  for (int s = 1; s < m; ++s)
    if (star.ring[s] < star.ring[s0]) s0 = s;
  Eigen::Vector3d e0 = star.pts.row(s0).normalized();
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  for (int s = 0; s < m; ++s) {
    Eigen::Vector3d a = star.pts.row(s), b = star.pts.row((s + 1) % m);
    n += 0.5 * a.cross(b);
  }
  n -= n.dot(e0) * e0;
  n.normalize();
  Eigen::Matrix3d F;
  F.col(0) = e0;
  F.col(1) = n.cross(e0);
  F.col(2) = n;
  return F;
}

namespace {

int ring_position(const StarLayout& star, int neighbor) {
  for (size_t s = 0; s < star.ring.size(); ++s)
    if (star.ring[s] == neighbor) return static_cast<int>(s);
  throw MeshError(MeshError::Kind::Mismatch,
                  "vertex " + std::to_string(neighbor) + " is not in the star of " +
                      std::to_string(star.center));
}

Eigen::Vector3d star_point(const StarLayout& star, int neighbor) {
  return star.pts.row(ring_position(star, neighbor));
}

}  // namespace

std::vector<RelativeRotation> relative_rotations(
    const MeshTopology& topo, const std::vector<StarLayout>& stars,
    const std::vector<Eigen::Matrix3d>& frames) {
  std::vector<RelativeRotation> rel;
  rel.reserve(topo.edges.count());
  for (int e = 0; e < topo.edges.count(); ++e) {
    const Edge& ed = topo.edges[e];
    int a = ed.a, b = ed.b;
    // shared points of the two merged stars: both centers plus the two
    // opposite vertices of the shared wedge pair
    int xl = -1, xr = -1;
    for (int c = 0; c < 3; ++c) {
      int v = topo.F(ed.left, c);
      if (v != a && v != b) xl = v;
      v = topo.F(ed.right, c);
      if (v != a && v != b) xr = v;
    }
    Eigen::Matrix<double, 4, 3> A, B;  // rows: a, b, xl, xr
    A.row(0) = star_point(stars[b], a);  // star-b local coords
    A.row(1) = Eigen::Vector3d::Zero().transpose();
    A.row(2) = star_point(stars[b], xl);
    A.row(3) = star_point(stars[b], xr);
    B.row(0) = Eigen::Vector3d::Zero().transpose();  // star-a local coords
    B.row(1) = star_point(stars[a], b);
    B.row(2) = star_point(stars[a], xl);
    B.row(3) = star_point(stars[a], xr);
    A.rowwise() -= A.colwise().mean();
    B.rowwise() -= B.colwise().mean();
    Eigen::Matrix3d H = B.transpose() * A;
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(H, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d U = svd.matrixU(), V = svd.matrixV();
    Eigen::Matrix3d D = Eigen::Matrix3d::Identity();
    D(2, 2) = (U * V.transpose()).determinant() < 0 ? -1.0 : 1.0;
    Eigen::Matrix3d Q = U * D * V.transpose();  // star-b coords -> star-a coords
    rel.emplace_back(a, b, frames[a].transpose() * Q * frames[b]);
  }
  return rel;
}

std::vector<Eigen::Matrix3d> solve_global_rotations(
    int n, const std::vector<RelativeRotation>& relative) {
  if (n < 1)
    throw MeshError(MeshError::Kind::Mismatch, "need at least one vertex");
  const int unknowns = 3 * (n - 1);
  std::vector<Eigen::Matrix3d> G(n, Eigen::Matrix3d::Identity());
  if (n == 1) return G;

  auto gcol = [](int v, int k) { return 3 * (v - 1) + k; };
  std::vector<Eigen::Triplet<double>> trips;
  // One scalar equation per (edge, component c); identical coefficients for
  // the three row problems, only the right-hand sides differ.
  Eigen::MatrixXd rhs(static_cast<int>(relative.size()) * 3, 3);
  rhs.setZero();
  int row = 0;
  for (const auto& [a, b, R] : relative) {
    for (int c = 0; c < 3; ++c, ++row) {
      if (a != 0)
        for (int k = 0; k < 3; ++k) trips.emplace_back(row, gcol(a, k), R(k, c));
      if (b != 0) trips.emplace_back(row, gcol(b, c), -1.0);
      for (int r = 0; r < 3; ++r) {
        double val = 0;
        if (a == 0) val -= R(r, c);
        if (b == 0) val += (r == c ? 1.0 : 0.0);
        rhs(row, r) = val;
      }
    }
  }
  Eigen::SparseMatrix<double> A(row, unknowns);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseMatrix<double> AtA = (Eigen::SparseMatrix<double>(A.transpose()) * A)
                                        .pruned();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(AtA);
  if (ldlt.info() != Eigen::Success)
    throw MeshError(MeshError::Kind::Solver, "rotation synchronization factorization failed");
  Eigen::MatrixXd X(unknowns, 3);
  for (int r = 0; r < 3; ++r) {
    X.col(r) = ldlt.solve(A.transpose() * rhs.col(r));
    if (ldlt.info() != Eigen::Success)
      throw MeshError(MeshError::Kind::Solver, "rotation synchronization solve failed");
  }
  for (int v = 1; v < n; ++v) {
    Eigen::Matrix3d Gv;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) Gv(r, c) = X(gcol(v, c), r);
    G[v] = project_rotation(Gv);
  }
  return G;
}

Eigen::MatrixX3d solve_vertex_positions(int n, const std::vector<LocalOffset>& offsets,
                                        const std::vector<Eigen::Matrix3d>& G) {
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixX3d rhs = Eigen::MatrixX3d::Zero(n, 3);
  for (const auto& [i, j, v] : offsets) {
    Eigen::Vector3d t = G[i] * v;  // ~ p_j - p_i
    trips.emplace_back(i, i, 1.0);
    trips.emplace_back(j, j, 1.0);
    trips.emplace_back(i, j, -1.0);
    trips.emplace_back(j, i, -1.0);
    rhs.row(i) -= t;
    rhs.row(j) += t;
  }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trips.begin(), trips.end());
  // translation gauge: pin vertex 0, recenter afterwards
  for (int k = 0; k < L.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it)
      if (it.row() == 0) it.valueRef() = (it.col() == 0) ? 1.0 : 0.0;
  rhs.row(0).setZero();
  L.prune(0.0);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(L);  // pinned row breaks symmetry
  if (lu.info() != Eigen::Success)
    throw MeshError(MeshError::Kind::Solver, "position solve factorization failed");
  Eigen::MatrixX3d P(n, 3);
  for (int c = 0; c < 3; ++c) P.col(c) = lu.solve(rhs.col(c));
  P.rowwise() -= P.colwise().mean();
  return P;
}

TriMesh initialize_embedding(const MeshTopology& topo, const Eigen::VectorXd& lengths,
                             const Eigen::VectorXd& dihedrals) {
  const int nv = topo.nv;
  std::vector<StarLayout> stars;
  stars.reserve(nv);
  std::vector<Eigen::Matrix3d> frames;
  frames.reserve(nv);
  for (int i = 0; i < nv; ++i) {
    stars.push_back(reconstruct_star(topo, i, lengths, dihedrals));
    frames.push_back(canonical_frame(stars[i]));
  }
  auto rel = relative_rotations(topo, stars, frames);
  auto G = solve_global_rotations(nv, rel);
  std::vector<LocalOffset> offsets;
  offsets.reserve(topo.edges.count() * 2);
  for (int e = 0; e < topo.edges.count(); ++e) {
    int a = topo.edges[e].a, b = topo.edges[e].b;
    offsets.emplace_back(a, b, frames[a].transpose() * star_point(stars[a], b));
    offsets.emplace_back(b, a, frames[b].transpose() * star_point(stars[b], a));
  }
  TriMesh mesh;
  mesh.V = solve_vertex_positions(nv, offsets, G);
  mesh.F = topo.F;
  return normalize_pose(mesh);
}

double dihedral_error(const TriMesh& mesh, const EdgeList& edges,
                      const Eigen::VectorXd& target) {
  if (target.size() != edges.count())
    throw MeshError(MeshError::Kind::Mismatch, "target length does not match edge count");
  return (dihedral_angles(mesh, edges) - target).norm();
}

RefineResult refine_embedding(const TriMesh& initial, const EdgeList& edges,
                              const Eigen::VectorXd& target, const MorphConfig& config) {
  const int nv = initial.nv();
  const int nf = initial.nf();
  const double sa = std::sqrt(config.alpha), sb = std::sqrt(config.beta);

  RefineResult res;
  res.mesh = initial;
  TriMesh cur = initial;
  double best_err = dihedral_error(cur, edges, target);
  res.trace.push_back(best_err);
  int stall = 0;

  for (int it = 0; it < config.max_iters; ++it) {
    res.iterations = it + 1;
    const Eigen::MatrixX3d N = face_normals(cur);

    // ---- normal solve: unknowns are the 3F normal components ----
    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> rhs;
    int row = 0;
    auto add = [&](int r, int f, int c, double v) { trips.emplace_back(r, 3 * f + c, v); };
    for (int e = 0; e < edges.count(); ++e) {
      const Edge& ed = edges[e];
      Eigen::Vector3d ev = cur.V.row(ed.b) - cur.V.row(ed.a);
      double ln = ev.norm();
      if (ln < 1e-14)
        throw MeshError(MeshError::Kind::Degenerate,
                        "edge collapsed during refinement");
      Eigen::Vector3d ehat = ev / ln;
      // transport across the edge: for an achieved dihedral this maps the
      // left normal onto the right normal
      Eigen::Matrix3d M = rot(ehat, kPi - target[e]);
      for (int c = 0; c < 3; ++c) {
        for (int k = 0; k < 3; ++k) add(row, ed.left, k, sa * M(c, k));
        add(row, ed.right, c, -sa);
        rhs.push_back(0.0);
        ++row;
      }
      for (int side = 0; side < 2; ++side) {
        int f = side == 0 ? ed.left : ed.right;
        Eigen::Vector3d w = ehat.cross(Eigen::Vector3d(N.row(f))).normalized();
        Eigen::Vector3d tvec = (rot(w, kPi / 2) / ln) * ev;
        for (int c = 0; c < 3; ++c) {
          add(row, f, c, sb);
          rhs.push_back(sb * tvec[c]);
          ++row;
        }
      }
    }
    Eigen::SparseMatrix<double> A(row, 3 * nf);
    A.setFromTriplets(trips.begin(), trips.end());
    Eigen::Map<const Eigen::VectorXd> b(rhs.data(), row);
    Eigen::SparseMatrix<double> At = A.transpose();
    Eigen::SparseMatrix<double> AtA = (At * A).pruned();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> nsolve(AtA);
    if (nsolve.info() != Eigen::Success)
      throw MeshError(MeshError::Kind::Solver, "normal solve factorization failed");
    Eigen::VectorXd x = nsolve.solve(At * b);
    Eigen::MatrixX3d Nn(nf, 3);
    for (int f = 0; f < nf; ++f) {
      Eigen::Vector3d nrow(x[3 * f], x[3 * f + 1], x[3 * f + 2]);
      double nn = nrow.norm();
      if (nn > 1e-12)
        Nn.row(f) = (nrow / nn).transpose();
      else
        Nn.row(f) = N.row(f);
    }

    // ---- position solve: hold the new normals, move vertices ----
    std::vector<Eigen::Triplet<double>> lt;
    Eigen::MatrixX3d Bp = Eigen::MatrixX3d::Zero(nv, 3);
    for (int e = 0; e < edges.count(); ++e) {
      const Edge& ed = edges[e];
      Eigen::Vector3d ev = cur.V.row(ed.b) - cur.V.row(ed.a);
      double ln = ev.norm();
      Eigen::Vector3d ehat = ev / ln;
      double wgt = 1.0 / (ln * ln);
      for (int side = 0; side < 2; ++side) {
        int f = side == 0 ? ed.left : ed.right;
        Eigen::Vector3d w = ehat.cross(Eigen::Vector3d(N.row(f))).normalized();
        Eigen::Vector3d t = ln * (rot(w, kPi / 2).transpose() * Eigen::Vector3d(Nn.row(f)));
        lt.emplace_back(ed.a, ed.a, wgt);
        lt.emplace_back(ed.b, ed.b, wgt);
        lt.emplace_back(ed.a, ed.b, -wgt);
        lt.emplace_back(ed.b, ed.a, -wgt);
        Bp.row(ed.a) -= wgt * t;
        Bp.row(ed.b) += wgt * t;
      }
    }
    Eigen::SparseMatrix<double> L(nv, nv);
    L.setFromTriplets(lt.begin(), lt.end());
    for (int k = 0; k < L.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator iti(L, k); iti; ++iti)
        if (iti.row() == 0) iti.valueRef() = (iti.col() == 0) ? 1.0 : 0.0;
    Bp.row(0).setZero();
    L.prune(0.0);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> psolve(L);
    if (psolve.info() != Eigen::Success)
      throw MeshError(MeshError::Kind::Solver, "position solve factorization failed");
    Eigen::MatrixX3d P(nv, 3);
    for (int c = 0; c < 3; ++c) P.col(c) = psolve.solve(Bp.col(c));
    P.rowwise() -= P.colwise().mean();
    cur.V = P;

    double err = dihedral_error(cur, edges, target);
    res.trace.push_back(err);
    if (err < best_err * (1 - config.stop)) {
      res.mesh = cur;
      best_err = err;
      stall = 0;
    } else {
      if (err < best_err) {
        res.mesh = cur;
        best_err = err;
      }
      if (++stall >= config.patience) break;
    }
  }
  return res;
}

MorphResult morph(const TriMesh& a, const TriMesh& b, const MorphConfig& config) {
  if (config.frames < 2)
    throw MeshError(MeshError::Kind::Mismatch, "frame count must be at least 2");
  if (a.nv() != b.nv() || a.nf() != b.nf() ||
      (a.F.array() != b.F.array()).any())
    throw MeshError(MeshError::Kind::Mismatch,
                    "morph endpoints must share an identical face list");
  TriMesh an = normalize_pose(a);
  TriMesh bn = normalize_pose(b, &an);
  MeshTopology topo = MeshTopology::of(an);
  const Eigen::VectorXd da = dihedral_angles(an, topo.edges);
  const Eigen::VectorXd db = dihedral_angles(bn, topo.edges);
  const Eigen::VectorXd la = edge_lengths(an, topo.edges);
  const Eigen::VectorXd lb = edge_lengths(bn, topo.edges);

  MorphResult result;
  result.wrap_warning = ((da - db).cwiseAbs().maxCoeff() > kPi);
  result.frames.resize(config.frames);

  auto run_frame = [&](int k) {
    MorphFrame& frame = result.frames[k];
    frame.index = k;
    frame.t = static_cast<double>(k) / (config.frames - 1);
    Eigen::VectorXd d = interpolate_dihedrals(da, db, frame.t);
    Eigen::VectorXd l = interpolate_edge_lengths(la, lb, frame.t, config.log_lengths);
    try {
      TriMesh init = initialize_embedding(topo, l, d);
      RefineResult ref = refine_embedding(init, topo.edges, d, config);
      frame.feasible = true;
      frame.init_error = ref.trace.front();
      frame.final_error = *std::min_element(ref.trace.begin(), ref.trace.end());
      frame.iterations = ref.iterations;
      frame.mesh = std::move(ref.mesh);
      frame.trace = std::move(ref.trace);
    } catch (const MeshError& e) {
      frame.feasible = false;
      frame.message = e.what();
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (int k = 0; k < config.frames; ++k) run_frame(k);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back([&, w] {
        for (int k = w; k < config.frames; k += jobs) run_frame(k);
      });
    for (auto& th : pool) th.join();
  }
  for (const MorphFrame& f : result.frames)
    if (!f.feasible) result.all_feasible = false;
  return result;
}

}  // namespace dihedra
