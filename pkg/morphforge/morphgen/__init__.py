# morphforge/morphgen/__init__.py

from .clone import (
    CloneMask,
    hull_clone_mask,
    load_clone_mask,
    save_clone_mask,
    seamless_clone,
)
from .mesh import TriangleMesh, delaunay_triangulate
from .pipeline import make_simple_morph
from .warp import average_landmarks, blend, warp_piecewise_affine

__all__ = [
    "CloneMask",
    "TriangleMesh",
    "average_landmarks",
    "blend",
    "delaunay_triangulate",
    "hull_clone_mask",
    "load_clone_mask",
    "make_simple_morph",
    "save_clone_mask",
    "seamless_clone",
    "warp_piecewise_affine",
]
