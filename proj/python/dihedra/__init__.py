"""Closed triangle meshes through their dihedral angles.

Rigidity testing, reconstruction from per-edge lengths and dihedrals, and
PCA-style shape statistics in dihedral space. The heavy lifting lives in the
compiled `_core` extension; this package re-exports it.
"""

from ._core import (
    MeshError,
    __version__,
    dihedral_angles,
    dihedral_error,
    edge_lengths,
    edges,
    face_normals,
    fit_pca,
    initialize_embedding,
    inner_angles,
    load_obj,
    normalize_pose,
    pca_project,
    pca_synthesize,
    refine_embedding,
    rigidity,
    save_obj,
    validate,
)

__all__ = [
    "MeshError",
    "__version__",
    "dihedral_angles",
    "dihedral_error",
    "edge_lengths",
    "edges",
    "face_normals",
    "fit_pca",
    "initialize_embedding",
    "inner_angles",
    "load_obj",
    "normalize_pose",
    "pca_project",
    "pca_synthesize",
    "refine_embedding",
    "rigidity",
    "save_obj",
    "validate",
]
