# morphforge/morphgen/clone.py

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage, sparse
from scipy.sparse import linalg
from scipy.spatial import ConvexHull, QhullError

from morphforge.core.arrays import BoolArray, FloatArray
from morphforge.core.exceptions import CloneMaskError, PoissonConvergenceError, ShapeMismatchError
from morphforge.imagekit.image import Image, LandmarkSet
from morphforge.imagekit.io import load_image, save_image

logger = logging.getLogger(__name__)

CG_RELATIVE_TOLERANCE = 1e-8
CG_MAX_ITERATIONS = 10_000

# (dy, dx) of the 5-point stencil neighbours
NEIGHBOURS = ((-1, 0), (1, 0), (0, -1), (0, 1))


@dataclass(frozen=True, eq=False)
class CloneMask:
    """Boolean (height, width) region to be cloned; the 1-pixel border ring stays outside."""

    inside: BoolArray

    def __post_init__(self) -> None:
        inside = np.array(self.inside, dtype=bool)
        if inside.ndim != 2:
            raise CloneMaskError(detail=f"Clone mask must be 2-D, got shape {inside.shape}")
        ring = np.ones_like(inside)
        ring[1:-1, 1:-1] = False
        if np.any(inside & ring):
            raise CloneMaskError(detail="Clone mask touches the image border")
        inside.setflags(write=False)
        object.__setattr__(self, "inside", inside)

    @property
    def width(self) -> int:
        return int(self.inside.shape[1])

    @property
    def height(self) -> int:
        return int(self.inside.shape[0])

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.inside))


def poisson_system(src_plane: FloatArray, dst_plane: FloatArray, inside: BoolArray) -> tuple[sparse.csr_matrix, FloatArray]:
    """5-point Laplacian system over the mask pixels with Dirichlet values from ``dst_plane``.

    Row p reads 4 f_p - sum(f_q, q inside) = 4 src_p - sum(src_q) + sum(dst_q, q outside).
    """
    height, width = inside.shape
    index = np.full(inside.shape, -1, dtype=np.int64)
    ys, xs = np.nonzero(inside)
    count = len(ys)
    index[ys, xs] = np.arange(count)

    rows = [np.arange(count)]
    cols = [np.arange(count)]
    values = [np.full(count, 4.0)]
    rhs = 4.0 * src_plane[ys, xs]

    for dy, dx in NEIGHBOURS:
        ny, nx = ys + dy, xs + dx
        if np.any((ny < 0) | (ny >= height) | (nx < 0) | (nx >= width)):
            raise CloneMaskError(detail="Clone mask touches the image border")
        rhs = rhs - src_plane[ny, nx]
        neighbour = index[ny, nx]
        linked = neighbour >= 0
        rows.append(np.nonzero(linked)[0])
        cols.append(neighbour[linked])
        values.append(np.full(int(np.count_nonzero(linked)), -1.0))
        rhs = rhs + np.where(linked, 0.0, dst_plane[ny, nx])

    matrix = sparse.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))),
        shape=(count, count),
    )
    return matrix, rhs


def seamless_clone(src: Image, dst: Image, mask: CloneMask) -> Image:
    """Poisson blend of ``src`` into ``dst`` over the mask, per channel.

    Pixels outside the mask are copied from ``dst`` unchanged; solved pixels
    are clamped to [0, 1].
    """
    src.require_same_shape(dst, what="clone source and destination")
    if (mask.width, mask.height) != (dst.width, dst.height):
        raise ShapeMismatchError(
            detail=f"Clone mask is {mask.width}x{mask.height}, image is {dst.width}x{dst.height}"
        )
    if mask.count == 0:
        logger.warning("Empty clone mask, destination returned unchanged")
        return dst

    ys, xs = np.nonzero(mask.inside)
    output = dst.data.copy()
    for channel in range(dst.channels):
        matrix, rhs = poisson_system(src.data[channel], dst.data[channel], mask.inside)
        solution, info = linalg.cg(
            matrix, rhs, rtol=CG_RELATIVE_TOLERANCE, atol=0.0, maxiter=CG_MAX_ITERATIONS
        )
        residual = float(np.linalg.norm(rhs - matrix @ solution))
        if info != 0:
            raise PoissonConvergenceError(
                residual=residual,
                detail=f"Conjugate gradient stopped with status {info} on channel {channel}",
            )
        logger.debug(f"Poisson channel {channel}: {mask.count} unknowns, residual {residual:.3e}")
        output[channel, ys, xs] = np.clip(solution, 0.0, 1.0)
    return Image(output)


def hull_clone_mask(lm: LandmarkSet, width: int, height: int, erode_px: int = 2) -> CloneMask:
    """Convex hull of the landmarks at pixel centers, eroded by ``erode_px``."""
    points = lm.as_array()
    if len(points) < 3:
        raise CloneMaskError(detail="A clone region needs at least three landmarks")
    try:
        hull = ConvexHull(points)
    except QhullError as e:
        raise CloneMaskError(detail=f"Landmark hull is degenerate: {e}")

    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    pixels = np.stack([xs.ravel(), ys.ravel(), np.ones(xs.size)], axis=1)
    distances = pixels @ hull.equations.T
    inside = np.all(distances <= 1e-9, axis=1).reshape(height, width)

    if erode_px > 0:
        inside = ndimage.binary_erosion(inside, iterations=erode_px)
    inside[0, :] = inside[-1, :] = False
    inside[:, 0] = inside[:, -1] = False
    if not inside.any():
        raise CloneMaskError(detail="Clone region is empty after erosion")
    return CloneMask(inside)


def save_clone_mask(mask: CloneMask, path: str | Path) -> None:
    """Write the mask as a PGM, 255 inside and 0 outside."""
    save_image(Image(mask.inside.astype(np.float64)[np.newaxis]), path)


def load_clone_mask(path: str | Path) -> CloneMask:
    img = load_image(path)
    if img.channels != 1:
        raise CloneMaskError(detail=f"Clone mask {path} must be a gray image")
    return CloneMask(img.data[0] >= 0.5)
