# morphforge/morphgen/mesh.py

"""Delaunay meshes over landmarks plus a fixed ring of frame points.

Bowyer-Watson insertion in lexicographic (x, y) order, followed by a diagonal
canonicalization pass: inside every cocircular quadrilateral the diagonal
touching the lowest vertex index is kept, so ties resolve deterministically.
"""

import logging
from dataclasses import dataclass

import numpy as np

from morphforge.core.arrays import FloatArray, IntArray
from morphforge.core.exceptions import MeshError
from morphforge.imagekit.image import LandmarkSet

logger = logging.getLogger(__name__)

FRAME_PREFIX = "__frame_"
MIN_TRIANGLE_AREA = 1e-9
SUPER_SCALE = 1e4


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Vertices with names, and counter-clockwise index triples."""

    names: tuple[str, ...]
    vertices: FloatArray
    triangles: IntArray

    def __post_init__(self) -> None:
        vertices = np.array(self.vertices, dtype=np.float64).reshape(-1, 2)
        triangles = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.names) != len(vertices):
            raise MeshError(detail="Vertex names and coordinates differ in length")
        if len(triangles) and (triangles.min() < 0 or triangles.max() >= len(vertices)):
            raise MeshError(detail="Triangle refers to an unknown vertex")
        areas = signed_areas(vertices, triangles)
        if np.any(np.abs(areas) <= MIN_TRIANGLE_AREA):
            raise MeshError(detail="Mesh contains a degenerate triangle")
        flip = areas < 0
        triangles[flip] = triangles[flip][:, [0, 2, 1]]
        vertices.setflags(write=False)
        triangles.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

    def positions_for(self, lm: LandmarkSet) -> FloatArray:
        """Vertex coordinates taken from ``lm``; frame vertices keep their own position."""
        coords = self.vertices.copy()
        for index, name in enumerate(self.names):
            if not name.startswith(FRAME_PREFIX):
                coords[index] = lm[name]
        return coords


def signed_areas(vertices: FloatArray, triangles: IntArray) -> FloatArray:
    """Half the cross product of each triangle's edge vectors (positive = counter-clockwise)."""
    if len(triangles) == 0:
        return np.zeros(0)
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    return 0.5 * ((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (c[:, 0] - a[:, 0]) * (b[:, 1] - a[:, 1]))


def frame_points(width: int, height: int) -> FloatArray:
    """Four corners and four edge midpoints of the pixel-center rectangle."""
    right, bottom = float(width - 1), float(height - 1)
    mid_x, mid_y = right / 2.0, bottom / 2.0
    return np.array(
        [
            (0.0, 0.0), (mid_x, 0.0), (right, 0.0), (right, mid_y),
            (right, bottom), (mid_x, bottom), (0.0, bottom), (0.0, mid_y),
        ]
    )


def circumcircle(p: FloatArray, q: FloatArray, r: FloatArray) -> tuple[FloatArray, float]:
    """Center and squared radius of the circle through three points."""
    bx, by = q - p
    cx, cy = r - p
    d = 2.0 * (bx * cy - by * cx)
    if abs(d) < 1e-300:
        return np.array([np.inf, np.inf]), np.inf
    b2, c2 = bx * bx + by * by, cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    return p + np.array([ux, uy]), ux * ux + uy * uy


def _bowyer_watson(points: FloatArray, order: list[int], tol: float) -> list[tuple[int, int, int]]:
    n = len(points)
    lo, hi = points.min(axis=0), points.max(axis=0)
    center = (lo + hi) / 2.0
    span = max(float(np.max(hi - lo)), 1.0) * SUPER_SCALE
    super_points = np.array(
        [
            center + (-2.0 * span, -span),
            center + (2.0 * span, -span),
            center + (0.0, 2.0 * span),
        ]
    )
    coords = np.vstack([points, super_points])

    triangles: dict[tuple[int, int, int], tuple[FloatArray, float]] = {}

    def add(a: int, b: int, c: int) -> None:
        key = (a, b, c)
        triangles[key] = circumcircle(coords[a], coords[b], coords[c])

    add(n, n + 1, n + 2)
    for index in order:
        point = coords[index]
        bad = [
            key
            for key, (center_k, radius2) in triangles.items()
            if float(np.sum((point - center_k) ** 2)) - radius2 < -tol * max(radius2, 1.0)
        ]
        edge_count: dict[tuple[int, int], int] = {}
        for a, b, c in bad:
            for edge in ((a, b), (b, c), (c, a)):
                key = (min(edge), max(edge))
                edge_count[key] = edge_count.get(key, 0) + 1
        for key in bad:
            del triangles[key]
        for (a, b), count in edge_count.items():
            if count == 1:
                add(a, b, index)

    return [key for key in triangles if max(key) < n]


def _canonicalize(points: FloatArray, tris: list[tuple[int, int, int]], tol: float) -> list[tuple[int, int, int]]:
    """Flip diagonals of cocircular quads so the diagonal meets the quad's lowest index."""
    current = [tuple(sorted(t)) for t in tris]
    for _ in range(10 * max(len(current), 1) ** 2):
        edge_map: dict[tuple[int, int], list[int]] = {}
        for t_index, (a, b, c) in enumerate(current):
            for edge in ((a, b), (b, c), (a, c)):
                edge_map.setdefault(edge, []).append(t_index)

        flipped = False
        for (a, b), owners in sorted(edge_map.items()):
            if len(owners) != 2:
                continue
            t1, t2 = current[owners[0]], current[owners[1]]
            c = next(v for v in t1 if v not in (a, b))
            d = next(v for v in t2 if v not in (a, b))
            if min(a, b) < min(c, d):
                continue
            center, radius2 = circumcircle(points[a], points[b], points[c])
            power = float(np.sum((points[d] - center) ** 2)) - radius2
            if abs(power) > tol * max(radius2, 1.0):
                continue
            current[owners[0]] = tuple(sorted((a, c, d)))
            current[owners[1]] = tuple(sorted((b, c, d)))
            flipped = True
            break
        if not flipped:
            return current
    raise MeshError(detail="Diagonal canonicalization did not settle")


def delaunay_triangulate(lm: LandmarkSet, width: int, height: int) -> TriangleMesh:
    """Delaunay mesh over the landmarks plus the 8 frame points of a width x height image."""
    names = list(lm.names)
    coords = lm.as_array()
    frame = frame_points(width, height)

    kept_names: list[str] = []
    kept: list[FloatArray] = []
    for name, point in list(zip(names, coords)) + [
        (f"{FRAME_PREFIX}{k}", p) for k, p in enumerate(frame)
    ]:
        if any(np.allclose(point, other, atol=1e-9, rtol=0.0) for other in kept):
            logger.warning(f"Skipping vertex '{name}' coinciding with an earlier vertex")
            continue
        kept_names.append(name)
        kept.append(np.asarray(point, dtype=np.float64))
    points = np.array(kept)

    if len(points) < 3:
        raise MeshError(detail="At least three distinct points are needed")
    centered = points - points.mean(axis=0)
    if np.linalg.matrix_rank(centered, tol=1e-9) < 2:
        raise MeshError(detail="All points are collinear")

    extent = max(float(np.ptp(points[:, 0])), float(np.ptp(points[:, 1])), 1.0)
    tol = 1e-12 * extent
    order = sorted(range(len(points)), key=lambda i: (points[i, 0], points[i, 1], i))
    triangles = _bowyer_watson(points, order, tol)
    triangles = _canonicalize(points, triangles, tol=1e-9)

    tri_array = np.array(sorted(triangles), dtype=np.int64).reshape(-1, 3)
    areas = signed_areas(points, tri_array)
    tri_array = tri_array[np.abs(areas) > MIN_TRIANGLE_AREA]
    logger.debug(f"Triangulated {len(points)} vertices into {len(tri_array)} triangles")
    return TriangleMesh(names=tuple(kept_names), vertices=points, triangles=tri_array)
