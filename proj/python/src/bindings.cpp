#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dihedra/analysis.hpp"
#include "dihedra/morph.hpp"
#include "dihedra/obj_io.hpp"
#include "dihedra/rigidity.hpp"

namespace py = pybind11;
using namespace dihedra;

namespace {

TriMesh make_mesh(const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F) {
  TriMesh m;
  m.V = V;
  m.F = F;
  return m;
}

py::dict report_to_dict(const TopologyReport& rep) {
  py::dict d;
  d["vertices"] = rep.vertices;
  d["edges"] = rep.edges;
  d["faces"] = rep.faces;
  d["euler"] = rep.euler;
  d["manifold"] = rep.manifold;
  d["closed"] = rep.closed;
  d["valid"] = rep.valid();
  d["offending"] = rep.offending;
  return d;
}

Eigen::MatrixX2i edge_array(const EdgeList& edges) {
  Eigen::MatrixX2i E(edges.count(), 2);
  for (int e = 0; e < edges.count(); ++e) {
    E(e, 0) = edges[e].a;
    E(e, 1) = edges[e].b;
  }
  return E;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "closed triangle meshes through their dihedral angles: rigidity, "
      "reconstruction, shape statistics";

  py::register_exception<MeshError>(m, "MeshError");

  m.def("load_obj", [](const std::string& path) {
    TriMesh mesh = load_obj(path);
    return py::make_tuple(mesh.V, mesh.F);
  }, py::arg("path"), "Read a closed triangle mesh; returns (V, F).");

  m.def("save_obj", [](const std::string& path, const Eigen::MatrixX3d& V,
                       const Eigen::MatrixX3i& F) {
    save_obj(path, make_mesh(V, F));
  }, py::arg("path"), py::arg("V"), py::arg("F"));

  m.def("validate", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F) {
    return report_to_dict(validate_topology(make_mesh(V, F)));
  }, py::arg("V"), py::arg("F"),
     "Topology report: counts, Euler number, manifoldness, defects.");

  m.def("edges", [](const Eigen::MatrixX3i& F, int nv) {
    return edge_array(build_edges(F, nv));
  }, py::arg("F"), py::arg("nv"),
     "Canonical (sorted) undirected edge list as an (E, 2) int array.");

  m.def("edge_lengths", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F) {
    TriMesh mesh = make_mesh(V, F);
    return edge_lengths(mesh, build_edges(mesh));
  }, py::arg("V"), py::arg("F"));

  m.def("dihedral_angles", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F) {
    TriMesh mesh = make_mesh(V, F);
    return dihedral_angles(mesh, build_edges(mesh));
  }, py::arg("V"), py::arg("F"),
     "Interior dihedral per canonical edge, in (0, 2*pi); pi is flat.");

  m.def("inner_angles", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F) {
    return inner_angles(make_mesh(V, F));
  }, py::arg("V"), py::arg("F"), "Corner angles, entry 3*f + corner.");

  m.def("face_normals", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F) {
    return face_normals(make_mesh(V, F));
  }, py::arg("V"), py::arg("F"));

  m.def("normalize_pose", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F,
                             py::object reference) {
    TriMesh mesh = make_mesh(V, F);
    if (reference.is_none()) return normalize_pose(mesh).V;
    TriMesh ref = make_mesh(reference.cast<Eigen::MatrixX3d>(), F);
    return normalize_pose(mesh, &ref).V;
  }, py::arg("V"), py::arg("F"), py::arg("reference") = py::none(),
     "Center, scale to unit RMS edge, optionally align onto reference vertices.");

  m.def("rigidity", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F,
                       double tol) {
    RigidityVerdict v = is_dihedral_inf_rigid(make_mesh(V, F), tol);
    py::dict d;
    d["rows"] = v.rows;
    d["cols"] = v.cols;
    d["rank"] = v.rank;
    d["sigma_min"] = v.sigma_min;
    d["sigma_max"] = v.sigma_max;
    d["tol"] = v.tol;
    d["rigid"] = v.rigid;
    d["kernel"] = v.kernel;
    return d;
  }, py::arg("V"), py::arg("F"), py::arg("tol") = -1.0,
     "Numeric rank verdict of the dihedral constraint system.");

  m.def("initialize_embedding", [](const Eigen::MatrixX3i& F, int nv,
                                   const Eigen::VectorXd& lengths,
                                   const Eigen::VectorXd& dihedrals) {
    return initialize_embedding(MeshTopology::from_faces(F, nv), lengths,
                                dihedrals).V;
  }, py::arg("F"), py::arg("nv"), py::arg("lengths"), py::arg("dihedrals"),
     "Positions from per-edge lengths and dihedrals (star layouts, rotation "
     "synchronization, least-squares positions).");

  m.def("refine_embedding", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F,
                               const Eigen::VectorXd& target, double alpha,
                               double beta, int max_iters, double stop,
                               int patience) {
    TriMesh mesh = make_mesh(V, F);
    MorphConfig cfg;
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.max_iters = max_iters;
    cfg.stop = stop;
    cfg.patience = patience;
    RefineResult res = refine_embedding(mesh, build_edges(mesh), target, cfg);
    return py::make_tuple(res.mesh.V, res.trace);
  }, py::arg("V"), py::arg("F"), py::arg("target"), py::arg("alpha") = 0.6,
     py::arg("beta") = 0.4, py::arg("max_iters") = 50, py::arg("stop") = 1e-4,
     py::arg("patience") = 5,
     "Alternating normals/positions refinement toward target dihedrals; "
     "returns (V, error_trace) with the best iterate.");

  m.def("dihedral_error", [](const Eigen::MatrixX3d& V, const Eigen::MatrixX3i& F,
                             const Eigen::VectorXd& target) {
    TriMesh mesh = make_mesh(V, F);
    return dihedral_error(mesh, build_edges(mesh), target);
  }, py::arg("V"), py::arg("F"), py::arg("target"));

  m.def("fit_pca", [](const Eigen::MatrixXd& rows, int k) {
    // rows = per-shape dihedral vectors; thin wrapper over the corpus fit
    if (rows.rows() < 2)
      throw MeshError(MeshError::Kind::Mismatch, "need at least two rows");
    Corpus corpus;
    corpus.dihedrals = rows;
    corpus.lengths = Eigen::MatrixXd::Ones(rows.rows(), rows.cols());
    PcaModel model = fit_pca(corpus, k);
    return py::make_tuple(model.mean, model.directions, model.variances);
  }, py::arg("rows"), py::arg("k"),
     "PCA over row vectors; returns (mean, directions, variances).");

  m.def("pca_project", [](const Eigen::VectorXd& mean,
                          const Eigen::MatrixXd& directions,
                          const Eigen::VectorXd& x) {
    PcaModel model;
    model.mean = mean;
    model.directions = directions;
    model.k = static_cast<int>(directions.cols());
    return project(model, x);
  }, py::arg("mean"), py::arg("directions"), py::arg("x"));

  m.def("pca_synthesize", [](const Eigen::VectorXd& mean,
                             const Eigen::MatrixXd& directions,
                             const Eigen::VectorXd& coords) {
    PcaModel model;
    model.mean = mean;
    model.directions = directions;
    model.k = static_cast<int>(directions.cols());
    return synthesize(model, coords);
  }, py::arg("mean"), py::arg("directions"), py::arg("coords"));

  m.attr("__version__") = "0.1.0";
}
