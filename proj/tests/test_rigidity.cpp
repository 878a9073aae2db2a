#include <cmath>

#include "doctest.h"
#include "dihedra/rigidity.hpp"
#include "support/shapes.hpp"

using namespace dihedra;
namespace ts = dihedra::testsupport;

namespace {

// Square pyramid whose base is subdivided by its (coplanar) center: vertex 5
// is flat, a known degenerate input for the constraint system.
TriMesh flat_center_pyramid() {
  TriMesh m;
  m.V.resize(6, 3);
  m.V << -1, -1, 0, 1, -1, 0, 1, 1, 0, -1, 1, 0, 0, 0, 1, 0, 0, 0;
  m.F.resize(8, 3);
  m.F << 0, 1, 4, 1, 2, 4, 2, 3, 4, 3, 0, 4,  // sides to the apex
      5, 1, 0, 5, 2, 1, 5, 3, 2, 5, 0, 3;     // base fan around the center
  return m;
}

}  // namespace

TEST_CASE("constraint matrix dimensions and face-row structure") {
  auto tet = ts::tetrahedron();
  auto Mt = assemble_rigidity_matrix(tet);
  CHECK(Mt.rows() == 20);  // 6V-4
  CHECK(Mt.cols() == 12);  // 6V-12 = 3F

  auto ico = ts::icosahedron();
  auto Mi = assemble_rigidity_matrix(ico);
  CHECK(Mi.rows() == 68);
  CHECK(Mi.cols() == 60);

  // face rows sit after the 3V vertex rows and hold exactly three ones
  Eigen::MatrixXd D(Mi.M);
  for (int f = 0; f < ico.nf(); ++f) {
    Eigen::VectorXd row = D.row(3 * ico.nv() + f);
    CHECK(row.sum() == doctest::Approx(3.0));
    CHECK(row.cwiseAbs().sum() == doctest::Approx(3.0));
    for (int c = 0; c < 3; ++c) CHECK(row[3 * f + c] == doctest::Approx(1.0));
  }
}

TEST_CASE("numeric rank on constructed matrices") {
  RigidityMatrix zero;
  zero.M = Eigen::SparseMatrix<double>(5, 4);
  zero.nv = 0;
  auto zv = numeric_rank(zero);
  CHECK(zv.rank == 0);
  CHECK_FALSE(zv.rigid);
  CHECK(zv.kernel.cols() == 4);
  CHECK((zv.kernel.transpose() * zv.kernel -
         Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  // duplicated column: rank 3 of 4, kernel spans (1,-1,0,0)/sqrt(2)
  Eigen::MatrixXd A = Eigen::MatrixXd::Random(6, 4);
  A.col(1) = A.col(0);
  RigidityMatrix dup;
  dup.M = A.sparseView();
  auto dv = numeric_rank(dup);
  CHECK(dv.rank == 3);
  REQUIRE(dv.kernel.cols() == 1);
  CHECK((A * dv.kernel).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(std::abs(dv.kernel(0, 0)) - 1 / std::sqrt(2.0)) < 1e-12);

  // identity: full rank, no kernel computed
  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
  RigidityMatrix id;
  id.M = I.sparseView();
  auto iv = numeric_rank(id);
  CHECK(iv.rank == 4);
  CHECK(iv.rigid);
  CHECK(iv.kernel.cols() == 0);
  CHECK(iv.sigma_min == doctest::Approx(1.0));
  CHECK(iv.sigma_max == doctest::Approx(1.0));
}

TEST_CASE("convex meshes are infinitesimally rigid in the dihedral sense") {
  for (auto mesh : {ts::tetrahedron(), ts::octahedron(), ts::icosahedron()}) {
    auto v = is_dihedral_inf_rigid(mesh);
    CHECK(v.rigid);
    CHECK(v.rank == v.cols);
    CHECK(v.kernel.cols() == 0);
    CHECK(v.sigma_min / v.sigma_max > 1e-6);
  }
  for (std::uint64_t seed : {21u, 22u}) {
    auto v = is_dihedral_inf_rigid(ts::random_hull(40, seed));
    CHECK(v.rigid);
  }
}

TEST_CASE("a flat vertex collapses the rigidity margin") {
  auto flat = flat_center_pyramid();
  auto v = is_dihedral_inf_rigid(flat);
  // the base-center rows degenerate: the margin drops to round-off
  CHECK(v.sigma_min / v.sigma_max < 1e-8);
  CHECK_FALSE(v.rigid);

  // popping the center off the plane restores a healthy margin
  auto popped = flat;
  popped.V(5, 2) = -0.4;
  auto w = is_dihedral_inf_rigid(popped);
  CHECK(w.rigid);
  CHECK(w.sigma_min / w.sigma_max > 1e-6);
}

TEST_CASE("finite differences confirm the vertex equation rows") {
  auto mesh = ts::perturb(ts::icosahedron(), 0.05, 31);
  for (std::uint64_t seed : {41u, 42u, 43u}) {
    auto vel = ts::random_velocity(mesh.nv(), seed);
    CHECK(validate_vertex_equation(mesh, vel) < 1e-6);
  }
}

TEST_CASE("finite differences confirm the cotangent rows") {
  auto mesh = ts::perturb(ts::icosahedron(), 0.05, 32);
  for (std::uint64_t seed : {44u, 45u, 46u}) {
    auto vel = ts::random_velocity(mesh.nv(), seed);
    CHECK(validate_cotangent_equation(mesh, vel) < 1e-6);
  }
}

TEST_CASE("rigid motions leave the angle quantities still") {
  auto mesh = ts::perturb(ts::icosahedron(), 0.05, 33);
  Eigen::MatrixX3d trans(mesh.nv(), 3);
  trans.rowwise() = Eigen::RowVector3d(0.3, -0.2, 0.1);
  CHECK(validate_vertex_equation(mesh, trans) < 1e-9);
  CHECK(validate_cotangent_equation(mesh, trans) < 1e-9);

  Eigen::Vector3d omega(0.2, 0.5, -0.3);
  Eigen::MatrixX3d rot(mesh.nv(), 3);
  for (int v = 0; v < mesh.nv(); ++v)
    rot.row(v) = omega.cross(Eigen::Vector3d(mesh.V.row(v))).transpose();
  CHECK(validate_vertex_equation(mesh, rot) < 1e-9);
  CHECK(validate_cotangent_equation(mesh, rot) < 1e-9);
}

TEST_CASE("near-degenerate corners are refused rather than mis-assembled") {
  TriMesh sliver = ts::tetrahedron();
  sliver.V.row(3) = 0.5 * (sliver.V.row(0) + sliver.V.row(1)) +
                    Eigen::RowVector3d(0, 0, 1e-13);
  CHECK_THROWS_AS(assemble_rigidity_matrix(sliver), MeshError);
}
