# morphforge/imagekit/io.py

import logging
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from morphforge.core.arrays import ByteArray
from morphforge.core.exceptions import ImageDecodeError, ImageReadError, LandmarkError
from morphforge.imagekit.image import Image, LandmarkSet

logger = logging.getLogger(__name__)

SUPPORTED_FORMATS = {"PNG", "PPM"}
SUPPORTED_MODES = {"L": 1, "RGB": 3}
SUFFIX_FORMATS = {".png": "PNG", ".pgm": "PPM", ".ppm": "PPM", ".pnm": "PPM"}


def load_image(path: str | Path) -> Image:
    """Load an 8-bit gray or RGB PNG / binary PGM / PPM file, samples scaled by 1/255."""
    path = Path(path)
    try:
        handle = PILImage.open(path)
    except FileNotFoundError as e:
        raise ImageReadError(detail=f"Image file not found: {path} ({e})")
    except UnidentifiedImageError as e:
        raise ImageDecodeError(detail=f"Unrecognized image data in {path}: {e}")
    except OSError as e:
        raise ImageReadError(detail=f"Cannot read image {path}: {e}")
    except (SyntaxError, ValueError) as e:
        raise ImageDecodeError(detail=f"Malformed image header in {path}: {e}")

    with handle:
        if handle.format not in SUPPORTED_FORMATS:
            raise ImageDecodeError(
                detail=f"Unsupported image format {handle.format} in {path}"
            )
        if handle.mode not in SUPPORTED_MODES:
            raise ImageDecodeError(
                detail=f"Unsupported pixel mode {handle.mode} in {path}; "
                f"expected 8-bit gray or RGB"
            )
        try:
            handle.load()
            pixels = np.asarray(handle, dtype=np.uint8)
        except (OSError, SyntaxError, ValueError) as e:
            raise ImageDecodeError(detail=f"Malformed image stream in {path}: {e}")

    return Image.from_hwc(pixels.astype(np.float64) / 255.0)


def quantize(img: Image) -> ByteArray:
    """Round-half-up 8-bit quantization after clamping to [0, 1], (H, W[, C]) uint8."""
    levels = np.floor(np.clip(img.to_hwc(), 0.0, 1.0) * 255.0 + 0.5)
    return levels.astype(np.uint8)


def save_image(img: Image, path: str | Path) -> None:
    """Write an 8-bit PNG, PGM or PPM file chosen by the path suffix."""
    path = Path(path)
    image_format = SUFFIX_FORMATS.get(path.suffix.lower())
    if image_format is None:
        raise ImageReadError(detail=f"Unsupported output suffix for {path}")
    if path.suffix.lower() == ".pgm" and img.channels != 1:
        raise ImageReadError(detail=f"PGM output needs a 1-channel image: {path}")
    if path.suffix.lower() == ".ppm" and img.channels != 3:
        raise ImageReadError(detail=f"PPM output needs a 3-channel image: {path}")

    try:
        PILImage.fromarray(quantize(img)).save(path, format=image_format)
    except OSError as e:
        raise ImageReadError(detail=f"Cannot write image {path}: {e}")


def parse_landmarks(text: str, source: str = "<string>") -> LandmarkSet:
    """Parse ``name x y`` lines; ``#`` starts a comment."""
    points: dict[str, tuple[float, float]] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise LandmarkError(
                detail=f"{source}:{line_number}: expected 'name x y', got '{raw_line.strip()}'"
            )
        name, x_text, y_text = parts
        if name in points:
            raise LandmarkError(detail=f"{source}:{line_number}: duplicate landmark '{name}'")
        try:
            points[name] = (float(x_text), float(y_text))
        except ValueError:
            raise LandmarkError(
                detail=f"{source}:{line_number}: coordinates of '{name}' are not numbers"
            )
    return LandmarkSet(points)


def load_landmarks(path: str | Path) -> LandmarkSet:
    """Read a UTF-8 landmark file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise LandmarkError(detail=f"Cannot read landmark file {path}: {e}")
    return parse_landmarks(text, source=str(path))


def save_landmarks(lm: LandmarkSet, path: str | Path) -> None:
    """Write a landmark file, one ``name x y`` triple per line."""
    lines = [f"{name} {x!r} {y!r}" for name, (x, y) in lm.points.items()]
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise LandmarkError(detail=f"Cannot write landmark file {path}: {e}")
