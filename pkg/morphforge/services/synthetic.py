# morphforge/services/synthetic.py

"""Procedural face images with landmarks, for desk-scale runs without a face database.

Every subject gets its own geometry, skin tone and skin texture; every image
of a subject adds a small head tilt, a little jitter and fresh sensor noise.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from morphforge.core.arrays import FloatArray
from morphforge.imagekit.face import rotate_about
from morphforge.imagekit.image import Image, LandmarkSet
from morphforge.imagekit.io import save_image, save_landmarks
from morphforge.imagekit.ops import convolve2d, gaussian_kernel
from morphforge.schemas.manifest import ManifestEntry, write_manifest
from morphforge.tasks.pool import run_tasks

logger = logging.getLogger(__name__)

SOURCE_DBS = ("synthA", "synthB")
GENDERS = ("m", "f")
MAX_TILT_DEG = 8.0


@dataclass(frozen=True)
class FaceGeometry:
    """Feature placement as fractions of the image size, in the level (untilted) frame."""

    center_x: float
    center_y: float
    face_rx: float
    face_ry: float
    eye_dx: float
    eye_y: float
    brow_gap: float
    mouth_y: float
    mouth_rx: float
    mouth_ry: float

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "FaceGeometry":
        return cls(
            center_x=0.5,
            center_y=0.5,
            face_rx=rng.uniform(0.30, 0.36),
            face_ry=rng.uniform(0.38, 0.44),
            eye_dx=rng.uniform(0.12, 0.16),
            eye_y=rng.uniform(-0.12, -0.08),
            brow_gap=rng.uniform(0.06, 0.09),
            mouth_y=rng.uniform(0.16, 0.22),
            mouth_rx=rng.uniform(0.08, 0.11),
            mouth_ry=rng.uniform(0.025, 0.04),
        )

    def jittered(self, rng: np.random.Generator, amount: float = 0.01) -> "FaceGeometry":
        return FaceGeometry(
            center_x=self.center_x + rng.uniform(-amount, amount),
            center_y=self.center_y + rng.uniform(-amount, amount),
            face_rx=self.face_rx,
            face_ry=self.face_ry,
            eye_dx=self.eye_dx + rng.uniform(-amount, amount) / 2,
            eye_y=self.eye_y,
            brow_gap=self.brow_gap,
            mouth_y=self.mouth_y + rng.uniform(-amount, amount) / 2,
            mouth_rx=self.mouth_rx,
            mouth_ry=self.mouth_ry,
        )

    def landmarks(self, size: int) -> LandmarkSet:
        cx, cy = self.center_x * size, self.center_y * size
        ex, ey = self.eye_dx * size, cy + self.eye_y * size
        by = ey - self.brow_gap * size
        my = cy + self.mouth_y * size
        mx, mh = self.mouth_rx * size, self.mouth_ry * size
        points = {
            "eye_left": (cx - ex, ey),
            "eye_right": (cx + ex, ey),
            "brow_left_outer": (cx - 1.6 * ex, by + 0.02 * size),
            "brow_left_inner": (cx - 0.5 * ex, by),
            "brow_right_inner": (cx + 0.5 * ex, by),
            "brow_right_outer": (cx + 1.6 * ex, by + 0.02 * size),
            "nose_tip": (cx, (ey + my) / 2.0 + 0.02 * size),
            "mouth_left": (cx - mx, my),
            "mouth_right": (cx + mx, my),
            "mouth_top": (cx, my - mh),
            "mouth_bottom": (cx, my + mh),
        }
        return LandmarkSet(points)


@dataclass(frozen=True)
class SubjectLook:
    skin: tuple[float, float, float]
    texture_seed: int
    texture_amount: float

    @classmethod
    def sample(cls, rng: np.random.Generator) -> "SubjectLook":
        base = rng.uniform(0.45, 0.75)
        return cls(
            skin=(min(base + 0.12, 1.0), base, max(base - 0.1, 0.0)),
            texture_seed=int(rng.integers(0, 2**31)),
            texture_amount=rng.uniform(0.06, 0.1),
        )


def _ellipse(xs: FloatArray, ys: FloatArray, cx: float, cy: float, rx: float, ry: float, edge: float = 1.5) -> FloatArray:
    """Soft ellipse mask, 1 inside with an ``edge``-pixel ramp."""
    r = np.sqrt(((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2)
    return np.clip((1.0 - r) * min(rx, ry) / edge, 0.0, 1.0)


def _texture(seed: int, size: int, sigma: float) -> FloatArray:
    noise = np.random.default_rng(seed).standard_normal((1, size, size))
    smooth = convolve2d(Image(noise), gaussian_kernel(sigma)).data[0]
    return smooth / max(float(smooth.std()), 1e-12)


def render_face(geometry: FaceGeometry, look: SubjectLook, size: int, noise_seed: int) -> tuple[Image, LandmarkSet]:
    """Render one level face; returns the image and its landmarks."""
    lm = geometry.landmarks(size)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    cx, cy = geometry.center_x * size, geometry.center_y * size

    background = 0.25 + 0.05 * _texture(noise_seed + 1, size, sigma=4.0)
    face = _ellipse(xs, ys, cx, cy, geometry.face_rx * size, geometry.face_ry * size)
    texture = look.texture_amount * _texture(look.texture_seed, size, sigma=0.8)

    planes = []
    for tone in look.skin:
        skin = tone + texture
        planes.append(background * (1.0 - face) + skin * face)
    data = np.stack(planes)

    features = []
    eye_rx, eye_ry = 0.05 * size, 0.025 * size
    for name in ("eye_left", "eye_right"):
        ex, ey = lm[name]
        features.append((_ellipse(xs, ys, ex, ey, eye_rx, eye_ry), (0.12, 0.1, 0.1)))
    for side in ("left", "right"):
        (ox, oy), (ix, iy) = lm[f"brow_{side}_outer"], lm[f"brow_{side}_inner"]
        bx, by = (ox + ix) / 2.0, (oy + iy) / 2.0
        features.append((_ellipse(xs, ys, bx, by, abs(ox - ix) / 2.0 + 1.0, 0.012 * size + 0.5), (0.2, 0.15, 0.1)))
    (lx, ly), (rx, _) = lm["mouth_left"], lm["mouth_right"]
    (_, ty), (_, bty) = lm["mouth_top"], lm["mouth_bottom"]
    features.append((_ellipse(xs, ys, (lx + rx) / 2.0, ly, (rx - lx) / 2.0, (bty - ty) / 2.0), (0.6, 0.25, 0.25)))

    for mask, color in features:
        data = data * (1.0 - mask) + np.asarray(color)[:, None, None] * mask

    sensor = np.random.default_rng(noise_seed).standard_normal(data.shape) * 0.01
    return Image(np.clip(data + sensor, 0.0, 1.0)), lm


@dataclass(frozen=True)
class SyntheticJob:
    subject_index: int
    image_index: int
    size: int
    seed: int
    image_path: Path
    landmarks_path: Path


def generate_one(job: SyntheticJob) -> None:
    subject_rng = np.random.default_rng([job.seed, job.subject_index])
    geometry = FaceGeometry.sample(subject_rng)
    look = SubjectLook.sample(subject_rng)

    image_rng = np.random.default_rng([job.seed, job.subject_index, job.image_index])
    geometry = geometry.jittered(image_rng)
    tilt = math.radians(image_rng.uniform(-MAX_TILT_DEG, MAX_TILT_DEG))
    noise_seed = int(image_rng.integers(0, 2**31))

    img, lm = render_face(geometry, look, job.size, noise_seed)
    center = (geometry.center_x * job.size, geometry.center_y * job.size)
    img, lm = rotate_about(img, lm, -tilt, center)
    save_image(img, job.image_path)
    save_landmarks(lm, job.landmarks_path)


def generate_dataset(
    out_dir: str | Path,
    subjects: int,
    images_per_subject: int = 1,
    size: int = 96,
    seed: int = 0,
    workers: int | None = None,
) -> list[ManifestEntry]:
    """Write images/, landmarks/ and manifest.csv under ``out_dir``.

    Subjects alternate gender and source database so that every
    (gender, source_db) group holds about a quarter of them.
    """
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "landmarks").mkdir(parents=True, exist_ok=True)

    entries: list[ManifestEntry] = []
    jobs: list[SyntheticJob] = []
    for subject_index in range(subjects):
        subject_id = f"s{subject_index:04d}"
        for image_index in range(images_per_subject):
            entry_id = f"{subject_id}_{image_index}"
            image_path = Path("images") / f"{entry_id}.png"
            landmarks_path = Path("landmarks") / f"{entry_id}.txt"
            entries.append(
                ManifestEntry(
                    id=entry_id,
                    image_path=image_path.as_posix(),
                    landmarks_path=landmarks_path.as_posix(),
                    subject_id=subject_id,
                    gender=GENDERS[subject_index % 2],
                    source_db=SOURCE_DBS[(subject_index // 2) % 2],
                )
            )
            jobs.append(
                SyntheticJob(
                    subject_index=subject_index,
                    image_index=image_index,
                    size=size,
                    seed=seed,
                    image_path=out_dir / image_path,
                    landmarks_path=out_dir / landmarks_path,
                )
            )

    run_tasks(generate_one, jobs, workers)
    write_manifest(entries, out_dir / "manifest.csv")
    logger.info(f"Generated {len(entries)} synthetic faces of {subjects} subjects in {out_dir}")
    return entries
