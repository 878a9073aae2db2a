#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "dihedra/mesh.hpp"
#include "dihedra/morph.hpp"

namespace dihedra {

// Same-topology meshes as rows of dihedral / edge-length matrices in the
// shared canonical edge order.
struct Corpus {
  MeshTopology topo;
  std::uint64_t topo_hash = 0;
  Eigen::MatrixXd dihedrals;  // rows = meshes
  Eigen::MatrixXd lengths;
  std::vector<std::string> labels;

  Eigen::VectorXd average_lengths() const { return lengths.colwise().mean().transpose(); }
};

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd directions;  // columns, orthonormal, variance-ordered
  Eigen::VectorXd variances;   // explained variance per retained component
  int k = 0;
};

std::uint64_t topology_hash(const Eigen::MatrixX3i& F, int nv);

Corpus build_corpus(const std::vector<TriMesh>& meshes,
                    const std::vector<std::string>& labels);

// Mean-centered SVD; directions = top-k right singular vectors with the
// largest-|entry| coordinate made positive.
PcaModel fit_pca(const Corpus& corpus, int k);

Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& dihedrals);

// mean + sum_m coords[m] * direction_m (coords may be shorter than k).
Eigen::VectorXd synthesize(const PcaModel& model, const Eigen::VectorXd& coords);

// Initialization-only reconstruction (no refinement), pose-normalized.
TriMesh reconstruct_from_pca(const MeshTopology& topo,
                             const Eigen::VectorXd& dihedrals,
                             const Eigen::VectorXd& lengths);

// model.csv rows: mean, then one row per component. A sidecar
// <model>.json next to it carries what synthesis needs beyond the
// directions: face list, corpus-average edge lengths, variances, counts.
void save_pca_model(const std::string& csv_path, const PcaModel& model,
                    const Corpus& corpus);

struct LoadedPcaModel {
  PcaModel model;
  MeshTopology topo;
  Eigen::VectorXd avg_lengths;
};

LoadedPcaModel load_pca_model(const std::string& csv_path);

void save_pca_scores(const std::string& csv_path, const PcaModel& model,
                     const Corpus& corpus);

}  // namespace dihedra
