# morphforge/morphgen/warp.py

import logging

import numpy as np

from morphforge.core.arrays import FloatArray, IntArray
from morphforge.core.exceptions import LandmarkError, MeshError
from morphforge.imagekit.image import Image, LandmarkSet
from morphforge.imagekit.ops import sample_bilinear
from morphforge.morphgen.mesh import TriangleMesh

logger = logging.getLogger(__name__)

BARYCENTRIC_TOLERANCE = -1e-9


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")


def average_landmarks(a: LandmarkSet, b: LandmarkSet, alpha: float) -> LandmarkSet:
    """Per-point (1 - alpha) * a + alpha * b, names in the order of ``a``."""
    _check_alpha(alpha)
    if set(a.names) != set(b.names):
        missing = sorted(set(a.names) ^ set(b.names))
        raise LandmarkError(detail=f"Landmark name sets differ: {missing}")
    coords_a = a.as_array()
    coords_b = b.as_array(a.names)
    return LandmarkSet.from_arrays(a.names, (1.0 - alpha) * coords_a + alpha * coords_b)


def blend(a: Image, b: Image, alpha: float) -> Image:
    """Per-sample (1 - alpha) * a + alpha * b."""
    _check_alpha(alpha)
    a.require_same_shape(b, what="blend inputs")
    return Image((1.0 - alpha) * a.data + alpha * b.data)


def _pixel_triangles(
    mesh_points: FloatArray, triangles: IntArray, width: int, height: int
) -> tuple[IntArray, FloatArray]:
    """Owning triangle and barycentric weights for every pixel center.

    Pixels on shared edges belong to the first triangle that covers them.
    """
    labels = np.full((height, width), -1, dtype=np.int64)
    weights = np.zeros((height, width, 3), dtype=np.float64)

    for t_index, tri in enumerate(triangles):
        p0, p1, p2 = mesh_points[tri]
        x_lo = max(int(np.floor(min(p0[0], p1[0], p2[0]))), 0)
        x_hi = min(int(np.ceil(max(p0[0], p1[0], p2[0]))), width - 1)
        y_lo = max(int(np.floor(min(p0[1], p1[1], p2[1]))), 0)
        y_hi = min(int(np.ceil(max(p0[1], p1[1], p2[1]))), height - 1)
        if x_lo > x_hi or y_lo > y_hi:
            continue

        ys, xs = np.mgrid[y_lo:y_hi + 1, x_lo:x_hi + 1].astype(np.float64)
        basis = np.array([[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]])
        inverse = np.linalg.inv(basis)
        dx, dy = xs - p0[0], ys - p0[1]
        w1 = inverse[0, 0] * dx + inverse[0, 1] * dy
        w2 = inverse[1, 0] * dx + inverse[1, 1] * dy
        w0 = 1.0 - w1 - w2

        window = labels[y_lo:y_hi + 1, x_lo:x_hi + 1]
        inside = (
            (w0 >= BARYCENTRIC_TOLERANCE)
            & (w1 >= BARYCENTRIC_TOLERANCE)
            & (w2 >= BARYCENTRIC_TOLERANCE)
            & (window < 0)
        )
        window[inside] = t_index
        weights[y_lo:y_hi + 1, x_lo:x_hi + 1][inside] = np.stack([w0, w1, w2], axis=-1)[inside]

    return labels, weights


def warp_piecewise_affine(img: Image, src: LandmarkSet, dst: LandmarkSet, mesh: TriangleMesh) -> Image:
    """Move ``img`` from the ``src`` geometry to the ``dst`` geometry triangle by triangle.

    Every output pixel is located in its ``dst`` triangle and mapped back to
    the matching ``src`` triangle with the same barycentric weights, which is
    the inverse affine map of that triangle pair; the sample is bilinear.
    """
    dst_points = mesh.positions_for(dst)
    src_points = mesh.positions_for(src)

    labels, weights = _pixel_triangles(dst_points, mesh.triangles, img.width, img.height)
    if np.any(labels < 0):
        uncovered = int(np.count_nonzero(labels < 0))
        raise MeshError(detail=f"{uncovered} pixels are not covered by any mesh triangle")

    corners = src_points[mesh.triangles[labels]]
    src_x = np.einsum("hwk,hwk->hw", weights, corners[..., 0])
    src_y = np.einsum("hwk,hwk->hw", weights, corners[..., 1])
    return Image(sample_bilinear(img.data, src_x, src_y))
