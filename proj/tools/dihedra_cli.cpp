#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "dihedra/analysis.hpp"
#include "dihedra/csv_io.hpp"
#include "dihedra/mesh.hpp"
#include "dihedra/morph.hpp"
#include "dihedra/obj_io.hpp"
#include "dihedra/rigidity.hpp"

namespace fs = std::filesystem;
using namespace dihedra;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string frame_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03d.obj", k);
  return buf;
}

std::string step_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%03d.obj", k);
  return buf;
}

int cmd_inspect(const std::string& path) {
  TriMesh mesh = load_obj(path);
  EdgeList edges = build_edges(mesh);
  Eigen::VectorXd d = dihedral_angles(mesh, edges);
  std::cout << "vertices: " << mesh.nv() << "\n"
            << "edges: " << edges.count() << "\n"
            << "faces: " << mesh.nf() << "\n"
            << "euler_characteristic: " << mesh.nv() - edges.count() + mesh.nf() << "\n"
            << "min_dihedral_rad: " << g17(d.minCoeff()) << "\n"
            << "max_dihedral_rad: " << g17(d.maxCoeff()) << "\n";
  return 0;
}

int cmd_rigidity(const std::string& path, double tol, const std::string& report,
                 const std::string& kernel_path, int max_vertices) {
  TriMesh mesh = load_obj(path);
  if (mesh.nv() > max_vertices)
    throw MeshError(MeshError::Kind::Mismatch,
                    "mesh has " + std::to_string(mesh.nv()) +
                        " vertices, above the cap " + std::to_string(max_vertices) +
                        " (raise with --max-vertices)");
  EdgeList edges = build_edges(mesh);
  RigidityVerdict v = is_dihedral_inf_rigid(mesh, tol);
  std::cout << "rows: " << v.rows << "\n"
            << "cols: " << v.cols << "\n"
            << "rank: " << v.rank << "\n"
            << "sigma_min: " << g17(v.sigma_min) << "\n"
            << "sigma_max: " << g17(v.sigma_max) << "\n"
            << "margin: " << g17(v.sigma_max > 0 ? v.sigma_min / v.sigma_max : 0.0) << "\n"
            << "tol: " << g17(v.tol) << "\n"
            << "rigid: " << (v.rigid ? "true" : "false") << "\n";
  if (!report.empty()) {
    nlohmann::json j;
    j["vertices"] = mesh.nv();
    j["edges"] = edges.count();
    j["faces"] = mesh.nf();
    j["rows"] = v.rows;
    j["cols"] = v.cols;
    j["rank"] = v.rank;
    j["sigma_min"] = v.sigma_min;
    j["sigma_max"] = v.sigma_max;
    j["tol"] = v.tol;
    j["rigid"] = v.rigid;
    std::ofstream out(report);
    if (!out) throw MeshError(MeshError::Kind::Io, "cannot write " + report);
    out << j.dump(2) << "\n";
  }
  if (!kernel_path.empty()) {
    if (v.rigid) {
      std::cerr << "note: mesh is rigid; kernel is empty, " << kernel_path
                << " not written\n";
    } else {
      std::ofstream out(kernel_path);
      if (!out) throw MeshError(MeshError::Kind::Io, "cannot write " + kernel_path);
      for (int c = 0; c < v.kernel.cols(); ++c) out << (c ? "," : "") << "k" << c + 1;
      out << "\n";
      for (int r = 0; r < v.kernel.rows(); ++r) {
        for (int c = 0; c < v.kernel.cols(); ++c)
          out << (c ? "," : "") << g17(v.kernel(r, c));
        out << "\n";
      }
    }
  }
  return 0;
}

int cmd_morph(const std::string& path_a, const std::string& path_b,
              const MorphConfig& config, const std::string& out_dir) {
  TriMesh a = load_obj(path_a);
  TriMesh b = load_obj(path_b);
  fs::create_directories(out_dir);
  MorphResult result = morph(a, b, config);
  if (result.wrap_warning)
    std::cerr << "warning: some per-edge dihedral differences exceed pi; linear "
                 "interpolation does not take the short way around for them\n";
  std::ofstream trace(fs::path(out_dir) / "trace.csv");
  if (!trace) throw MeshError(MeshError::Kind::Io, "cannot write trace.csv");
  trace << "frame,t,init_error,final_error,iterations,status\n";
  for (const MorphFrame& f : result.frames) {
    if (f.feasible) {
      save_obj((fs::path(out_dir) / frame_name(f.index)).string(), f.mesh);
      trace << f.index << "," << g17(f.t) << "," << g17(f.init_error) << ","
            << g17(f.final_error) << "," << f.iterations << ",ok\n";
      std::cout << "frame " << f.index << ": t=" << g17(f.t)
                << " init=" << g17(f.init_error) << " final=" << g17(f.final_error)
                << " iters=" << f.iterations << "\n";
    } else {
      trace << f.index << "," << g17(f.t) << ",,,0,infeasible\n";
      std::cout << "frame " << f.index << ": t=" << g17(f.t) << " infeasible ("
                << f.message << ")\n";
    }
  }
  return result.all_feasible ? 0 : 1;
}

int cmd_pca(const std::string& dir, int components, const std::string& model_path,
            const std::string& scores_path) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".obj")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 2)
    throw MeshError(MeshError::Kind::Mismatch,
                    dir + ": need at least two .obj files, found " +
                        std::to_string(files.size()));
  std::vector<TriMesh> meshes;
  std::vector<std::string> labels;
  for (const auto& p : files) {
    meshes.push_back(load_obj(p.string()));
    labels.push_back(p.filename().string());
  }
  Corpus corpus = build_corpus(meshes, labels);
  PcaModel model = fit_pca(corpus, components);
  save_pca_model(model_path, model, corpus);
  save_pca_scores(scores_path, model, corpus);
  std::cout << "meshes: " << meshes.size() << "\n"
            << "edges: " << corpus.topo.edges.count() << "\n"
            << "components: " << model.k << "\n";
  for (int c = 0; c < model.k; ++c)
    std::cout << "variance_" << c + 1 << ": " << g17(model.variances[c]) << "\n";
  return 0;
}

int cmd_synth(const std::string& model_path, int component, const std::string& range,
              int steps, const std::string& lengths_arg, const std::string& out_dir) {
  LoadedPcaModel loaded = load_pca_model(model_path);
  if (component < 1 || component > loaded.model.k)
    throw MeshError(MeshError::Kind::Mismatch,
                    "component must be in [1, " + std::to_string(loaded.model.k) + "]");
  auto colon = range.find(':');
  if (colon == std::string::npos)
    throw MeshError(MeshError::Kind::Parse, "--range expects lo:hi");
  double lo, hi;
  try {
    lo = std::stod(range.substr(0, colon));
    hi = std::stod(range.substr(colon + 1));
  } catch (...) {
    throw MeshError(MeshError::Kind::Parse, "--range expects numeric lo:hi");
  }
  if (steps < 1)
    throw MeshError(MeshError::Kind::Mismatch, "--steps must be at least 1");
  Eigen::VectorXd lengths;
  if (lengths_arg == "avg") {
    lengths = loaded.avg_lengths;
  } else {
    lengths = read_edge_csv(lengths_arg, loaded.topo.edges);
  }
  double sigma = std::sqrt(loaded.model.variances[component - 1]);
  fs::create_directories(out_dir);
  for (int s = 0; s < steps; ++s) {
    double u = steps == 1 ? lo : lo + (hi - lo) * s / (steps - 1);
    Eigen::VectorXd coords = Eigen::VectorXd::Zero(loaded.model.k);
    coords[component - 1] = u * sigma;  // range is in standard deviations
    Eigen::VectorXd dih = synthesize(loaded.model, coords);
    TriMesh mesh = reconstruct_from_pca(loaded.topo, dih, lengths);
    std::string name = step_name(s);
    save_obj((fs::path(out_dir) / name).string(), mesh);
    std::cout << name << ": c" << component << "=" << g17(u) << " sigma\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dihedral-angle mesh analysis: rigidity, morphing, shape statistics"};
  app.set_version_flag("--version", std::string("dihedra ") + kVersion);
  app.require_subcommand(1);

  std::string in_a, in_b, out_dir, report, kernel_path, model_path, scores_path,
      range, lengths_arg;
  double tol = -1.0;
  int max_vertices = 2000;
  MorphConfig config;
  int components = 2;
  int component = 1;
  int steps = 5;

  CLI::App* inspect = app.add_subcommand("inspect", "mesh counts and dihedral range");
  inspect->add_option("mesh", in_a, "input OBJ")->required();

  CLI::App* rigidity = app.add_subcommand("rigidity", "dihedral infinitesimal rigidity verdict");
  rigidity->add_option("mesh", in_a, "input OBJ")->required();
  rigidity->add_option("--tol", tol, "relative rank threshold (default 1e-10*max(rows,cols))");
  rigidity->add_option("--report", report, "write a JSON report");
  rigidity->add_option("--kernel", kernel_path, "write the kernel basis CSV when non-rigid");
  rigidity->add_option("--max-vertices", max_vertices, "vertex-count cap for the dense SVD");

  CLI::App* morph_cmd = app.add_subcommand("morph", "interpolate two same-topology meshes in dihedral space");
  morph_cmd->add_option("a", in_a, "first OBJ")->required();
  morph_cmd->add_option("b", in_b, "second OBJ")->required();
  morph_cmd->add_option("--frames", config.frames, "total frames including endpoints")->required();
  morph_cmd->add_option("--alpha", config.alpha, "dihedral-term weight");
  morph_cmd->add_option("--beta", config.beta, "coupling-term weight");
  morph_cmd->add_option("--max-iters", config.max_iters, "refinement iteration cap");
  morph_cmd->add_option("--stop", config.stop, "relative improvement threshold");
  morph_cmd->add_option("--jobs", config.jobs, "frames computed concurrently");
  morph_cmd->add_flag("--log-lengths", config.log_lengths, "interpolate edge lengths in log space");
  morph_cmd->add_option("--out", out_dir, "output directory")->required();

  CLI::App* pca = app.add_subcommand("pca", "fit a PCA model over a directory of same-topology OBJs");
  pca->add_option("dir", in_a, "directory of .obj files")->required();
  pca->add_option("--components", components, "retained components")->required();
  pca->add_option("--out", model_path, "model CSV (a .json sidecar is written next to it)")->required();
  pca->add_option("--scores", scores_path, "per-mesh coordinates CSV")->required();

  CLI::App* synth = app.add_subcommand("synth", "reconstruct meshes along a principal direction");
  synth->add_option("model", model_path, "model CSV from 'pca'")->required();
  synth->add_option("--component", component, "1-based principal component")->required();
  synth->add_option("--range", range, "lo:hi sweep in standard deviations")->required();
  synth->add_option("--steps", steps, "number of samples")->required();
  synth->add_option("--lengths", lengths_arg, "'avg' or an edge-length CSV")->required();
  synth->add_option("--out", out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (inspect->parsed()) return cmd_inspect(in_a);
    if (rigidity->parsed()) return cmd_rigidity(in_a, tol, report, kernel_path, max_vertices);
    if (morph_cmd->parsed()) return cmd_morph(in_a, in_b, config, out_dir);
    if (pca->parsed()) return cmd_pca(in_a, components, model_path, scores_path);
    if (synth->parsed()) return cmd_synth(model_path, component, range, steps, lengths_arg, out_dir);
  } catch (const MeshError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
