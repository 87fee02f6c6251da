"""Ground-truth fields and surface machinery."""

from .cells import CellGrid, active_cells
from .chamfer import chamfer_distance
from .marching import Contour, SurfaceMesh, extract_levelset
from .mesh import MeshError, SignUnreliableError, TriMesh, load_mesh, write_obj
from .shapes import (Box, Circle, MeshTarget, Polygon, Signal1D, Sphere, Target, eval_sdf,
                     koch_snowflake, parse_target)


def normalize_shape(target):
    """Return the target with its maximal extent mapped onto [-1, 1]."""
    if isinstance(target, MeshTarget):
        return MeshTarget(target.mesh.normalized())
    if isinstance(target, Polygon):
        from .shapes import normalize_polygon
        return Polygon(normalize_polygon(target.vertices))
    return target


__all__ = [
    "Box", "CellGrid", "Circle", "Contour", "MeshError", "MeshTarget", "Polygon", "Signal1D",
    "SignUnreliableError", "Sphere", "SurfaceMesh", "Target", "TriMesh", "active_cells",
    "chamfer_distance", "eval_sdf", "extract_levelset", "koch_snowflake", "load_mesh",
    "normalize_shape", "parse_target", "write_obj",
]
