#include "dihedra/rigidity.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace dihedra {

namespace {

constexpr double kCornerSingular = 1e-9;

// Corner normal of the vertex equations: for the wedge a face f forms at
// one of its vertices, this is the negative outward unit normal of f.
Eigen::Vector3d corner_normal(const TriMesh& mesh, int f) {
  Eigen::Vector3d u = mesh.V.row(mesh.F(f, 1)) - mesh.V.row(mesh.F(f, 0));
  Eigen::Vector3d v = mesh.V.row(mesh.F(f, 2)) - mesh.V.row(mesh.F(f, 0));
  return -u.cross(v).normalized();
}

}  // namespace

RigidityMatrix assemble_rigidity_matrix(const TriMesh& mesh) {
  const int nv = mesh.nv();
  const int nf = mesh.nf();
  MeshTopology topo = MeshTopology::of(mesh);
  const Eigen::VectorXd beta = inner_angles(mesh);

  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) {
      double b = beta[3 * f + c];
      if (b < kCornerSingular || b > std::numbers::pi - kCornerSingular)
        throw MeshError(MeshError::Kind::SingularCorner,
                        "corner (face " + std::to_string(f) + ", slot " + std::to_string(c) +
                            ") has inner angle within 1e-9 of 0 or pi");
    }

  const int rows = 6 * nv - 4;
  const int cols = 6 * nv - 12;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(nv * 40);

  // vertex rows: rows 3i+c accumulate the corner-normal coefficients of the
  // one-ring corners at i
  for (int i = 0; i < nv; ++i) {
    const auto& ring = topo.rings[i];
    const int m = static_cast<int>(ring.size());
    for (int s = 0; s < m; ++s) {
      int j = ring[s];
      int f = topo.edges.face_of_halfedge(i, j);  // face (i, j, ring[s+1])
      Eigen::Vector3d n = corner_normal(mesh, f);
      int col = 3 * f + corner_of(mesh.F, f, i);
      for (int c = 0; c < 3; ++c) trips.emplace_back(3 * i + c, col, n[c]);
    }
  }

  // face rows: three ones each
  for (int f = 0; f < nf; ++f)
    for (int c = 0; c < 3; ++c) trips.emplace_back(3 * nv + f, 3 * f + c, 1.0);

  // cotangent rows: per vertex i, for each ring face (i, a, b) the wedge
  // corners at a and b enter with +cot(beta_a) and -cot(beta_b)
  for (int i = 0; i < nv; ++i) {
    const auto& ring = topo.rings[i];
    const int m = static_cast<int>(ring.size());
    const int row = 3 * nv + nf + i;
    for (int s = 0; s < m; ++s) {
      int a = ring[s], b = ring[(s + 1) % m];
      int f = topo.edges.face_of_halfedge(i, a);
      int ca = corner_of(mesh.F, f, a), cb = corner_of(mesh.F, f, b);
      trips.emplace_back(row, 3 * f + ca, 1.0 / std::tan(beta[3 * f + ca]));
      trips.emplace_back(row, 3 * f + cb, -1.0 / std::tan(beta[3 * f + cb]));
    }
  }

  RigidityMatrix M;
  M.nv = nv;
  M.M.resize(rows, cols);
  M.M.setFromTriplets(trips.begin(), trips.end());
  return M;
}

RigidityVerdict numeric_rank(const RigidityMatrix& matrix, double tol) {
  RigidityVerdict v;
  v.rows = matrix.rows();
  v.cols = matrix.cols();
  if (tol < 0) tol = 1e-10 * std::max(v.rows, v.cols);
  v.tol = tol;

  Eigen::MatrixXd dense = Eigen::MatrixXd(matrix.M);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
  const Eigen::VectorXd& sigma = svd.singularValues();
  v.sigma_max = sigma.size() ? sigma[0] : 0.0;
  v.sigma_min = sigma.size() ? sigma[sigma.size() - 1] : 0.0;
  const double thresh = tol * v.sigma_max;
  v.rank = 0;
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma[i] > thresh) ++v.rank;
  v.rigid = (v.rank == v.cols);
  if (!v.rigid) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd2(dense, Eigen::ComputeThinV);
    v.kernel = svd2.matrixV().rightCols(v.cols - v.rank);
  }
  return v;
}

RigidityVerdict is_dihedral_inf_rigid(const TriMesh& mesh, double tol) {
  return numeric_rank(assemble_rigidity_matrix(mesh), tol);
}

namespace {

struct AngleDerivs {
  Eigen::VectorXd alpha_p;  // per canonical edge
  Eigen::VectorXd beta_p;   // per corner
  bool wrapped = false;
};

AngleDerivs central_differences(const TriMesh& mesh, const EdgeList& edges,
                                const Eigen::MatrixX3d& velocity, double h) {
  TriMesh plus = mesh, minus = mesh;
  plus.V += h * velocity;
  minus.V -= h * velocity;
  AngleDerivs d;
  Eigen::VectorXd ap = dihedral_angles(plus, edges);
  Eigen::VectorXd am = dihedral_angles(minus, edges);
  d.wrapped = ((ap - am).cwiseAbs().maxCoeff() > std::numbers::pi / 2);
  d.alpha_p = (ap - am) / (2 * h);
  d.beta_p = (inner_angles(plus) - inner_angles(minus)) / (2 * h);
  return d;
}

AngleDerivs derivatives_with_fallback(const TriMesh& mesh, const EdgeList& edges,
                                      const Eigen::MatrixX3d& velocity, double& h) {
  AngleDerivs d = central_differences(mesh, edges, velocity, h);
  for (int tries = 0; d.wrapped && tries < 4; ++tries) {
    h /= 2;
    d = central_differences(mesh, edges, velocity, h);
  }
  return d;
}

double vertex_residual(const TriMesh& mesh, const MeshTopology& topo,
                       const AngleDerivs& d) {
  double worst = 0;
  for (int i = 0; i < mesh.nv(); ++i) {
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    for (size_t s = 0; s < topo.rings[i].size(); ++s) {
      int j = topo.rings[i][s];
      Eigen::Vector3d ehat = (mesh.V.row(i) - mesh.V.row(j)).normalized();
      r += d.alpha_p[topo.edges.index(i, j)] * ehat;
      int f = topo.edges.face_of_halfedge(i, j);
      r += d.beta_p[3 * f + corner_of(mesh.F, f, i)] * corner_normal(mesh, f);
    }
    worst = std::max(worst, r.norm());
  }
  return worst;
}

double cotangent_residual(const TriMesh& mesh, const MeshTopology& topo,
                          const Eigen::VectorXd& beta, const AngleDerivs& d) {
  double worst = 0;
  for (int i = 0; i < mesh.nv(); ++i) {
    const auto& ring = topo.rings[i];
    const int m = static_cast<int>(ring.size());
    double r = 0;
    for (int s = 0; s < m; ++s) {
      int a = ring[s], b = ring[(s + 1) % m];
      int f = topo.edges.face_of_halfedge(i, a);
      int ca = corner_of(mesh.F, f, a), cb = corner_of(mesh.F, f, b);
      r += d.beta_p[3 * f + ca] / std::tan(beta[3 * f + ca]);
      r -= d.beta_p[3 * f + cb] / std::tan(beta[3 * f + cb]);
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double contract_scale(const TriMesh& mesh, const EdgeList& edges,
                      const Eigen::MatrixX3d& velocity) {
  double vscale = std::sqrt(velocity.squaredNorm() / velocity.rows());
  double mscale = rms_edge_length(mesh, edges);
  return std::max(1.0, vscale / mscale);
}

}  // namespace

double validate_vertex_equation(const TriMesh& mesh, const Eigen::MatrixX3d& velocity,
                                double h) {
  MeshTopology topo = MeshTopology::of(mesh);
  double h_used = h;
  AngleDerivs d = derivatives_with_fallback(mesh, topo.edges, velocity, h_used);
  double res = vertex_residual(mesh, topo, d);
  if (res > 1e-6 * contract_scale(mesh, topo.edges, velocity)) {
    // Richardson: combine h and h/2 to cancel the O(h^2) truncation term
    double h2 = h_used / 2;
    AngleDerivs dh = central_differences(mesh, topo.edges, velocity, h2);
    if (!dh.wrapped) {
      AngleDerivs rich;
      rich.alpha_p = (4 * dh.alpha_p - d.alpha_p) / 3;
      rich.beta_p = (4 * dh.beta_p - d.beta_p) / 3;
      res = std::min(res, vertex_residual(mesh, topo, rich));
    }
  }
  return res;
}

double validate_cotangent_equation(const TriMesh& mesh, const Eigen::MatrixX3d& velocity,
                                   double h) {
  MeshTopology topo = MeshTopology::of(mesh);
  const Eigen::VectorXd beta = inner_angles(mesh);
  double h_used = h;
  AngleDerivs d = derivatives_with_fallback(mesh, topo.edges, velocity, h_used);
  double res = cotangent_residual(mesh, topo, beta, d);
  if (res > 1e-6 * contract_scale(mesh, topo.edges, velocity)) {
    double h2 = h_used / 2;
    AngleDerivs dh = central_differences(mesh, topo.edges, velocity, h2);
    if (!dh.wrapped) {
      AngleDerivs rich;
      rich.alpha_p = (4 * dh.alpha_p - d.alpha_p) / 3;
      rich.beta_p = (4 * dh.beta_p - d.beta_p) / 3;
      res = std::min(res, cotangent_residual(mesh, topo, beta, rich));
    }
  }
  return res;
}

}  // namespace dihedra
