#include "dihedra/analysis.hpp"

#include <array>
#include <fstream>
#include <nlohmann/json.hpp>

#include "dihedra/csv_io.hpp"

namespace dihedra {

std::uint64_t topology_hash(const Eigen::MatrixX3i& F, int nv) {
  // FNV-1a over the face list and vertex count
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](std::uint64_t x) {
    for (int k = 0; k < 8; ++k) {
      h ^= (x >> (8 * k)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(nv));
  for (int f = 0; f < F.rows(); ++f)
    for (int c = 0; c < 3; ++c) mix(static_cast<std::uint64_t>(F(f, c)));
  return h;
}

Corpus build_corpus(const std::vector<TriMesh>& meshes,
                    const std::vector<std::string>& labels) {
  if (meshes.empty())
    throw MeshError(MeshError::Kind::Mismatch, "corpus needs at least one mesh");
  if (labels.size() != meshes.size())
    throw MeshError(MeshError::Kind::Mismatch, "label count does not match mesh count");
  Corpus corpus;
  corpus.topo = MeshTopology::of(meshes[0]);
  corpus.topo_hash = topology_hash(corpus.topo.F, corpus.topo.nv);
  const int ne = corpus.topo.edges.count();
  corpus.dihedrals.resize(meshes.size(), ne);
  corpus.lengths.resize(meshes.size(), ne);
  corpus.labels = labels;
  for (size_t m = 0; m < meshes.size(); ++m) {
    if (topology_hash(meshes[m].F, meshes[m].nv()) != corpus.topo_hash)
      throw MeshError(MeshError::Kind::Mismatch,
                      "mesh '" + labels[m] + "' does not share the corpus topology");
    corpus.dihedrals.row(m) = dihedral_angles(meshes[m], corpus.topo.edges).transpose();
    corpus.lengths.row(m) = edge_lengths(meshes[m], corpus.topo.edges).transpose();
  }
  return corpus;
}

PcaModel fit_pca(const Corpus& corpus, int k) {
  const int rows = static_cast<int>(corpus.dihedrals.rows());
  const int cols = static_cast<int>(corpus.dihedrals.cols());
  if (rows < 2)
    throw MeshError(MeshError::Kind::Mismatch, "pca needs at least two meshes");
  if (k < 1 || k > std::min(rows - 1, cols))
    throw MeshError(MeshError::Kind::Mismatch,
                    "component count must be in [1, min(rows-1, cols)]");
  PcaModel model;
  model.k = k;
  model.mean = corpus.dihedrals.colwise().mean().transpose();
  Eigen::MatrixXd X = corpus.dihedrals.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinV);
  model.directions = svd.matrixV().leftCols(k);
  model.variances = svd.singularValues().head(k).array().square() / (rows - 1);
  // deterministic sign: largest-|entry| coordinate positive
  for (int c = 0; c < k; ++c) {
    int at = 0;
    model.directions.col(c).cwiseAbs().maxCoeff(&at);
    if (model.directions(at, c) < 0) model.directions.col(c) = -model.directions.col(c);
  }
  return model;
}

Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& dihedrals) {
  if (dihedrals.size() != model.mean.size())
    throw MeshError(MeshError::Kind::Mismatch, "dihedral vector length mismatch");
  return model.directions.transpose() * (dihedrals - model.mean);
}

Eigen::VectorXd synthesize(const PcaModel& model, const Eigen::VectorXd& coords) {
  if (coords.size() > model.k)
    throw MeshError(MeshError::Kind::Mismatch, "more coordinates than components");
  return model.mean + model.directions.leftCols(coords.size()) * coords;
}

TriMesh reconstruct_from_pca(const MeshTopology& topo, const Eigen::VectorXd& dihedrals,
                             const Eigen::VectorXd& lengths) {
  return initialize_embedding(topo, lengths, dihedrals);
}

namespace {

std::string sidecar_path(const std::string& csv_path) {
  auto dot = csv_path.rfind('.');
  std::string base = (dot == std::string::npos) ? csv_path : csv_path.substr(0, dot);
  return base + ".json";
}

}  // namespace

void save_pca_model(const std::string& csv_path, const PcaModel& model,
                    const Corpus& corpus) {
  std::ofstream out(csv_path);
  if (!out)
    throw MeshError(MeshError::Kind::Io, "cannot write " + csv_path);
  auto write_row = [&](const std::string& label, const Eigen::VectorXd& v) {
    out << label;
    for (int i = 0; i < v.size(); ++i) out << "," << g17(v[i]);
    out << "\n";
  };
  write_row("mean", model.mean);
  for (int c = 0; c < model.k; ++c)
    write_row("component_" + std::to_string(c + 1), model.directions.col(c));

  nlohmann::json meta;
  meta["vertices"] = corpus.topo.nv;
  meta["edges"] = corpus.topo.edges.count();
  meta["components"] = model.k;
  meta["topology_hash"] = corpus.topo_hash;
  std::vector<std::array<int, 3>> faces(corpus.topo.F.rows());
  for (int f = 0; f < corpus.topo.F.rows(); ++f)
    faces[f] = {corpus.topo.F(f, 0), corpus.topo.F(f, 1), corpus.topo.F(f, 2)};
  meta["faces"] = faces;
  Eigen::VectorXd avg = corpus.average_lengths();
  meta["average_lengths"] = std::vector<double>(avg.data(), avg.data() + avg.size());
  meta["variances"] =
      std::vector<double>(model.variances.data(), model.variances.data() + model.k);
  std::ofstream js(sidecar_path(csv_path));
  if (!js)
    throw MeshError(MeshError::Kind::Io, "cannot write " + sidecar_path(csv_path));
  js << meta.dump(2) << "\n";
}

LoadedPcaModel load_pca_model(const std::string& csv_path) {
  auto rows = read_csv(csv_path);
  if (rows.empty() || rows[0].empty() || rows[0][0] != "mean")
    throw MeshError(MeshError::Kind::Parse, csv_path + ": expected a 'mean' first row");
  LoadedPcaModel loaded;
  const int ne = static_cast<int>(rows[0].size()) - 1;
  loaded.model.mean.resize(ne);
  for (int i = 0; i < ne; ++i) loaded.model.mean[i] = std::stod(rows[0][i + 1]);
  loaded.model.k = static_cast<int>(rows.size()) - 1;
  loaded.model.directions.resize(ne, loaded.model.k);
  for (int c = 0; c < loaded.model.k; ++c) {
    const auto& row = rows[c + 1];
    if (static_cast<int>(row.size()) != ne + 1)
      throw MeshError(MeshError::Kind::Parse, csv_path + ": ragged component row");
    for (int i = 0; i < ne; ++i) loaded.model.directions(i, c) = std::stod(row[i + 1]);
  }

  std::ifstream js(sidecar_path(csv_path));
  if (!js)
    throw MeshError(MeshError::Kind::Io,
                    "cannot open model sidecar " + sidecar_path(csv_path));
  nlohmann::json meta = nlohmann::json::parse(js);
  int nv = meta.at("vertices").get<int>();
  auto faces = meta.at("faces").get<std::vector<std::array<int, 3>>>();
  Eigen::MatrixX3i F(faces.size(), 3);
  for (size_t f = 0; f < faces.size(); ++f)
    F.row(f) << faces[f][0], faces[f][1], faces[f][2];
  loaded.topo = MeshTopology::from_faces(F, nv);
  auto avg = meta.at("average_lengths").get<std::vector<double>>();
  if (static_cast<int>(avg.size()) != loaded.topo.edges.count() ||
      loaded.topo.edges.count() != ne)
    throw MeshError(MeshError::Kind::Mismatch, csv_path + ": sidecar does not match model");
  loaded.avg_lengths = Eigen::Map<Eigen::VectorXd>(avg.data(), avg.size());
  auto vars = meta.at("variances").get<std::vector<double>>();
  loaded.model.variances = Eigen::Map<Eigen::VectorXd>(vars.data(), vars.size());
  return loaded;
}

void save_pca_scores(const std::string& csv_path, const PcaModel& model,
                     const Corpus& corpus) {
  std::ofstream out(csv_path);
  if (!out)
    throw MeshError(MeshError::Kind::Io, "cannot write " + csv_path);
  out << "label";
  for (int c = 0; c < model.k; ++c) out << ",c" << c + 1;
  out << "\n";
  for (int m = 0; m < corpus.dihedrals.rows(); ++m) {
    Eigen::VectorXd coords = project(model, corpus.dihedrals.row(m).transpose());
    out << corpus.labels[m];
    for (int c = 0; c < model.k; ++c) out << "," << g17(coords[c]);
    out << "\n";
  }
}

}  // namespace dihedra
