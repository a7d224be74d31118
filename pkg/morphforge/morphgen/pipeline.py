# morphforge/morphgen/pipeline.py

import logging
from typing import Literal

from morphforge.imagekit.image import Image, LandmarkSet
from morphforge.morphgen.clone import hull_clone_mask, seamless_clone
from morphforge.morphgen.mesh import delaunay_triangulate
from morphforge.morphgen.warp import average_landmarks, blend, warp_piecewise_affine

logger = logging.getLogger(__name__)

CloneTarget = Literal["none", "A", "B"]


def make_simple_morph(
    img_a: Image,
    lm_a: LandmarkSet,
    img_b: Image,
    lm_b: LandmarkSet,
    alpha: float = 0.5,
    clone_into: CloneTarget = "none",
) -> Image:
    """Average the geometry, warp both faces onto it and blend them.

    With ``clone_into`` set, the blended inner face (eroded landmark hull) is
    Poisson-cloned into the chosen original after that original has itself
    been warped to the averaged geometry.
    """
    if clone_into not in ("none", "A", "B"):
        raise ValueError(f"clone_into must be none, A or B, got {clone_into}")
    img_a.require_same_shape(img_b, what="morph inputs")

    average = average_landmarks(lm_a, lm_b, alpha)
    # mesh vertex order must not depend on which face is called A
    names = sorted(average.names)
    average = LandmarkSet.from_arrays(names, average.as_array(names))
    mesh = delaunay_triangulate(average, img_a.width, img_a.height)
    warped_a = warp_piecewise_affine(img_a, lm_a, average, mesh)
    warped_b = warp_piecewise_affine(img_b, lm_b, average, mesh)
    blended = blend(warped_a, warped_b, alpha)

    if clone_into == "none":
        return blended

    target = warped_a if clone_into == "A" else warped_b
    mask = hull_clone_mask(average, img_a.width, img_a.height)
    logger.debug(f"Cloning {mask.count} blended pixels into warped original {clone_into}")
    return seamless_clone(blended, target, mask)
