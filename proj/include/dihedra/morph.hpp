#pragma once

#include <Eigen/Dense>
#include <string>
#include <tuple>
#include <vector>

#include "dihedra/mesh.hpp"

namespace dihedra {

struct MorphConfig {
  int frames = 10;      // total samples including both endpoints; >= 2
  double alpha = 0.6;   // weight of the dihedral (normal-transport) term
  double beta = 0.4;    // weight of the normal/position coupling term
  int max_iters = 50;
  double stop = 1e-4;   // relative improvement threshold
  int patience = 5;     // non-improving iterations tolerated before stopping
  bool log_lengths = false;  // interpolate lengths in log space (extension)
  int jobs = 1;
};

// One-ring of `center` laid out in local coordinates from target lengths and
// spoke dihedrals; center at the origin. The angular closure defect of the
// wedge chain is distributed uniformly over the wedges, so spoke lengths are
// exact and ring-edge lengths absorb the error.
struct StarLayout {
  int center = -1;
  std::vector<int> ring;     // CCW, starts at the smallest-index neighbor
  Eigen::MatrixX3d pts;      // ring positions, row s = ring[s]
  double closure_defect = 0.0;  // rotation angle of the defect, radians
};

// (i, j, R) with the semantics G_i * R ~= G_j.
using RelativeRotation = std::tuple<int, int, Eigen::Matrix3d>;
// (i, j, v) contributing the term ||(p_i - p_j) + G_i v||^2.
using LocalOffset = std::tuple<int, int, Eigen::Vector3d>;

Eigen::VectorXd interpolate_dihedrals(const Eigen::VectorXd& a,
                                      const Eigen::VectorXd& b, double t);
Eigen::VectorXd interpolate_edge_lengths(const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b, double t,
                                         bool log_space = false);

StarLayout reconstruct_star(const MeshTopology& topo, int center,
                            const Eigen::VectorXd& lengths,
                            const Eigen::VectorXd& dihedrals);

// Deterministic local frame of a star: col 0 = unit vector to the first ring
// neighbor (smallest index), col 2 = area-weighted star normal orthonormalized
// against col 0, col 1 = col2 x col0.
Eigen::Matrix3d canonical_frame(const StarLayout& star);

// Per undirected edge (a, b): rotation R_ab expressing frame b in frame a
// after rigidly merging the two stars over their shared wedge pair.
std::vector<RelativeRotation> relative_rotations(
    const MeshTopology& topo, const std::vector<StarLayout>& stars,
    const std::vector<Eigen::Matrix3d>& frames);

// min sum ||G_i R_ij - G_j||_F^2 with G_0 = I, blocks projected to SO(3).
std::vector<Eigen::Matrix3d> solve_global_rotations(
    int n, const std::vector<RelativeRotation>& relative);

// min sum ||(p_i - p_j) + G_i v_ij||^2, centroid pinned at the origin.
Eigen::MatrixX3d solve_vertex_positions(int n,
                                        const std::vector<LocalOffset>& offsets,
                                        const std::vector<Eigen::Matrix3d>& G);

// Star reconstruction -> frames -> rotation synchronization -> positions.
// Output pose-normalized.
TriMesh initialize_embedding(const MeshTopology& topo,
                             const Eigen::VectorXd& lengths,
                             const Eigen::VectorXd& dihedrals);

struct RefineResult {
  TriMesh mesh;               // best iterate (never worse than the input)
  std::vector<double> trace;  // trace[0] = error of `initial`
  int iterations = 0;
};

// Alternating refinement: per iteration rebuild the per-edge normal-transport
// maps from the current mesh and the target dihedrals, solve for face normals
// (then renormalize), solve for positions. Keeps the best iterate; stops when
// `patience` consecutive iterations fail to improve it by a relative `stop`.
RefineResult refine_embedding(const TriMesh& initial, const EdgeList& edges,
                              const Eigen::VectorXd& target,
                              const MorphConfig& config);

double dihedral_error(const TriMesh& mesh, const EdgeList& edges,
                      const Eigen::VectorXd& target);

struct MorphFrame {
  int index = 0;
  double t = 0.0;
  bool feasible = false;
  double init_error = 0.0;
  double final_error = 0.0;
  int iterations = 0;
  TriMesh mesh;
  std::vector<double> trace;
  std::string message;  // failure description when infeasible
};

struct MorphResult {
  std::vector<MorphFrame> frames;
  bool all_feasible = true;
  bool wrap_warning = false;  // some per-edge |a - b| exceeded pi
};

MorphResult morph(const TriMesh& a, const TriMesh& b, const MorphConfig& config);

}  // namespace dihedra
