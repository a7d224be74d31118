# morphforge/imagekit/__init__.py

from .face import FACE_SIZE, eye_angle, face_box, normalize_face
from .image import Image, Kernel2D, LandmarkSet
from .io import (
    load_image,
    load_landmarks,
    parse_landmarks,
    quantize,
    save_image,
    save_landmarks,
)
from .ops import (
    convolve2d,
    crop,
    gaussian_kernel,
    resize_bilinear,
    sample_bilinear,
    to_grayscale,
)

__all__ = [
    "FACE_SIZE",
    "Image",
    "Kernel2D",
    "LandmarkSet",
    "convolve2d",
    "crop",
    "eye_angle",
    "face_box",
    "gaussian_kernel",
    "load_image",
    "load_landmarks",
    "normalize_face",
    "parse_landmarks",
    "quantize",
    "resize_bilinear",
    "sample_bilinear",
    "save_image",
    "save_landmarks",
    "to_grayscale",
]
