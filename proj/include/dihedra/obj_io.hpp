#pragma once

#include <string>

#include "dihedra/mesh.hpp"

namespace dihedra {

// Wavefront OBJ reader: v/f records, 1-based indices, polygons
// fan-triangulated from the first face vertex, other records ignored.
// Validates closed-manifold sphere topology and throws MeshError with a
// distinct kind (Parse / NonManifold / OpenBoundary / NonSpherical) naming
// the offending element.
TriMesh load_obj(const std::string& path);

// Writes vertices with 17 significant digits.
void save_obj(const std::string& path, const TriMesh& mesh);

}  // namespace dihedra
