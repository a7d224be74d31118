# tests/conftest.py

import numpy as np
import pytest

from morphforge.config import get_settings
from morphforge.imagekit.image import Image, LandmarkSet
from morphforge.schemas.manifest import ManifestEntry
from morphforge.schemas.run_config import RunConfig
from morphforge.services.synthetic import FaceGeometry, SubjectLook, render_face
from morphforge.styletransfer.net import build_test_net


@pytest.fixture(autouse=True)
def fresh_settings(monkeypatch):
    """Isolate every test from the caller's MORPHFORGE_* environment."""
    for name in ("MORPHFORGE_WORKERS", "MORPHFORGE_LOG_LEVEL", "MORPHFORGE_FLOAT_FORMAT"):
        monkeypatch.delenv(name, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def gray_image(rng) -> Image:
    """Random 16x16 gray image."""
    return Image(rng.random((1, 16, 16)))


@pytest.fixture
def color_image(rng) -> Image:
    """Random 16x16 RGB image."""
    return Image(rng.random((3, 16, 16)))


@pytest.fixture
def face_landmarks() -> LandmarkSet:
    """Level face landmarks inside a 64x64 frame."""
    return LandmarkSet(
        {
            "eye_left": (22.0, 24.0),
            "eye_right": (42.0, 24.0),
            "brow_left": (20.0, 17.0),
            "brow_right": (44.0, 17.0),
            "nose_tip": (32.0, 34.0),
            "mouth_left": (25.0, 45.0),
            "mouth_right": (39.0, 45.0),
        }
    )


@pytest.fixture
def synthetic_face():
    """Factory for rendered synthetic faces: (Image, LandmarkSet)."""

    def make(seed: int, size: int = 64) -> tuple[Image, LandmarkSet]:
        subject_rng = np.random.default_rng(seed)
        geometry = FaceGeometry.sample(subject_rng)
        look = SubjectLook.sample(subject_rng)
        return render_face(geometry, look, size, noise_seed=seed + 100)

    return make


@pytest.fixture
def tiny_net():
    """Two-block seeded test network with 4 channels per block."""
    return build_test_net(7, [4, 4])


@pytest.fixture
def run_config() -> RunConfig:
    """Default run configuration."""
    return RunConfig()


@pytest.fixture
def manifest_factory():
    """Build manifest entries from (subject, gender, source_db) triples, one image each."""

    def make(subjects: list[tuple[str, str, str]], split: str = "train", images: int = 1) -> list[ManifestEntry]:
        return [
            ManifestEntry(
                id=f"{subject}_{k}",
                image_path=f"images/{subject}_{k}.png",
                landmarks_path=f"landmarks/{subject}_{k}.txt",
                subject_id=subject,
                gender=gender,
                source_db=source_db,
                split=split,
            )
            for subject, gender, source_db in subjects
            for k in range(images)
        ]

    return make
