#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dihedra/mesh.hpp"

namespace dihedra {

// Constraint system M b' = 0 over corner-angle derivatives, column j = corner
// (face j/3, slot j%3). Rows: 3V vertex rows (x,y,z per vertex), then 2V-4
// face rows (exactly three ones each), then V cotangent rows.
struct RigidityMatrix {
  Eigen::SparseMatrix<double> M;  // (6V-4) x (6V-12)
  int nv = 0;

  int rows() const { return static_cast<int>(M.rows()); }
  int cols() const { return static_cast<int>(M.cols()); }
};

struct RigidityVerdict {
  int rows = 0, cols = 0;
  int rank = 0;
  double sigma_min = 0.0;  // smallest of the cols leading singular values
  double sigma_max = 0.0;
  double tol = 0.0;  // relative threshold actually used
  bool rigid = false;
  Eigen::MatrixXd kernel;  // orthonormal null-space basis; 0 cols when rigid
};

RigidityMatrix assemble_rigidity_matrix(const TriMesh& mesh);

// rank = #{sigma > tol * sigma_max}. tol < 0 selects the default
// 1e-10 * max(rows, cols). Kernel basis computed only when rank < cols.
RigidityVerdict numeric_rank(const RigidityMatrix& matrix, double tol = -1.0);

RigidityVerdict is_dihedral_inf_rigid(const TriMesh& mesh, double tol = -1.0);

// Finite-difference checks of the constraint rows along the path
// p(t) = p + t * velocity: central differences of the angle quantities at
// t = 0, step h, halved on angle wrap, Richardson (h, h/2) fallback when the
// residual exceeds the smooth-mesh contract. Returns the max residual.
double validate_vertex_equation(const TriMesh& mesh,
                                const Eigen::MatrixX3d& velocity,
                                double h = 1e-5);
double validate_cotangent_equation(const TriMesh& mesh,
                                   const Eigen::MatrixX3d& velocity,
                                   double h = 1e-5);

}  // namespace dihedra
