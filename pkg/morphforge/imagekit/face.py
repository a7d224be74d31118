# morphforge/imagekit/face.py

import logging
import math

import numpy as np

from morphforge.core.arrays import FloatArray
from morphforge.core.exceptions import LandmarkError
from morphforge.imagekit.image import Image, LandmarkSet
from morphforge.imagekit.ops import crop, resize_bilinear, sample_bilinear

logger = logging.getLogger(__name__)

FACE_SIZE = 224


def eye_angle(lm: LandmarkSet) -> float:
    """Angle (radians) of the eye line, wrapped into [-pi/2, pi/2)."""
    lm.require_eyes()
    (xl, yl), (xr, yr) = lm["eye_left"], lm["eye_right"]
    angle = math.atan2(yr - yl, xr - xl)
    if angle >= math.pi / 2:
        angle -= math.pi
    elif angle < -math.pi / 2:
        angle += math.pi
    return angle


def rotate_about(img: Image, lm: LandmarkSet, angle: float, center: tuple[float, float]) -> tuple[Image, LandmarkSet]:
    """Rotate image content by ``-angle`` about ``center`` (same frame size, replicate border)."""
    if angle == 0.0:
        return img, lm
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    cx, cy = center

    ys, xs = np.meshgrid(
        np.arange(img.height, dtype=np.float64),
        np.arange(img.width, dtype=np.float64),
        indexing="ij",
    )
    # output pixel -> source pixel is the forward rotation by +angle
    src_x = cx + cos_a * (xs - cx) - sin_a * (ys - cy)
    src_y = cy + sin_a * (xs - cx) + cos_a * (ys - cy)
    rotated = Image(sample_bilinear(img.data, src_x, src_y))

    def inverse(points: FloatArray) -> FloatArray:
        dx, dy = points[:, 0] - cx, points[:, 1] - cy
        return np.column_stack([cx + cos_a * dx + sin_a * dy, cy - sin_a * dx + cos_a * dy])

    return rotated, lm.transformed(inverse)


def face_box(lm: LandmarkSet) -> tuple[float, float, float, float]:
    """Axis-aligned bounding box (x0, y0, x1, y1) of all brow_* and mouth_* points."""
    lm.require_face_box()
    names = lm.with_prefix("brow_") + lm.with_prefix("mouth_")
    coords = lm.as_array(names)
    x0, y0 = coords.min(axis=0)
    x1, y1 = coords.max(axis=0)
    if x1 - x0 <= 1e-9 or y1 - y0 <= 1e-9:
        raise LandmarkError(
            detail=f"Degenerate face box ({x0:.3f},{y0:.3f})-({x1:.3f},{y1:.3f})"
        )
    return float(x0), float(y0), float(x1), float(y1)


def normalize_face(img: Image, lm: LandmarkSet, size: int = FACE_SIZE) -> tuple[Image, LandmarkSet]:
    """Level the eyes, crop the brow/mouth box and scale it to ``size`` x ``size``.

    The rotation is about the eye midpoint. The crop covers the whole pixels
    spanned by the box, clipped to the frame; the returned landmarks hold every
    input point mapped into the output frame.
    """
    lm.require_face_box()
    angle = eye_angle(lm)
    (xl, yl), (xr, yr) = lm["eye_left"], lm["eye_right"]
    center = ((xl + xr) / 2.0, (yl + yr) / 2.0)
    rotated, rotated_lm = rotate_about(img, lm, angle, center)

    bx0, by0, bx1, by1 = face_box(rotated_lm)
    x0 = min(max(int(math.floor(bx0)), 0), rotated.width - 1)
    y0 = min(max(int(math.floor(by0)), 0), rotated.height - 1)
    x1 = min(max(int(math.ceil(bx1)), x0), rotated.width - 1)
    y1 = min(max(int(math.ceil(by1)), y0), rotated.height - 1)
    cropped = crop(rotated, x0, y0, x1, y1)
    crop_w, crop_h = x1 - x0 + 1, y1 - y0 + 1

    output = resize_bilinear(cropped, size, size)

    def to_output(points: FloatArray) -> FloatArray:
        u = (points[:, 0] - x0 + 0.5) * (size / crop_w) - 0.5
        v = (points[:, 1] - y0 + 0.5) * (size / crop_h) - 0.5
        return np.column_stack([u, v])

    logger.debug(
        f"normalize_face: angle {math.degrees(angle):.3f} deg, crop ({x0},{y0})-({x1},{y1})"
    )
    return output, rotated_lm.transformed(to_output)
