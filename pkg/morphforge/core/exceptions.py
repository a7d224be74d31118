# morphforge/core/exceptions.py

from typing import Optional


class MorphForgeException(Exception):
    """Base MorphForge exception."""

    def __init__(
        self,
        detail: str,
        exit_code: int = 1,
        error_code: Optional[str] = None,
    ):
        self.detail = detail
        self.exit_code = exit_code
        self.error_code = error_code
        super().__init__(detail)


class ImageReadError(MorphForgeException):
    """Image file could not be read or written."""

    def __init__(self, detail: str = "Image file not readable"):
        super().__init__(detail=detail, exit_code=2, error_code="IMAGE_READ_ERROR")


class ArtifactIOError(MorphForgeException):
    """Non-image artifact file could not be read or written."""

    def __init__(self, detail: str = "Artifact file not accessible"):
        super().__init__(detail=detail, exit_code=2, error_code="ARTIFACT_IO_ERROR")


class ImageDecodeError(MorphForgeException):
    """Image bytes are malformed or in an unsupported format."""

    def __init__(self, detail: str = "Image decoding failed"):
        super().__init__(detail=detail, exit_code=2, error_code="IMAGE_DECODE_ERROR")


class LandmarkError(MorphForgeException):
    """Landmark set is malformed or lacks required points."""

    def __init__(self, detail: str = "Invalid landmarks"):
        super().__init__(detail=detail, exit_code=2, error_code="LANDMARK_ERROR")


class ShapeMismatchError(MorphForgeException):
    """Operands have incompatible dimensions."""

    def __init__(self, detail: str = "Shape mismatch"):
        super().__init__(detail=detail, exit_code=1, error_code="SHAPE_MISMATCH")


class MeshError(MorphForgeException):
    """Triangulation or warp coverage failure."""

    def __init__(self, detail: str = "Mesh construction failed"):
        super().__init__(detail=detail, exit_code=1, error_code="MESH_ERROR")


class CloneMaskError(MorphForgeException):
    """Clone mask violates its border invariant."""

    def __init__(self, detail: str = "Invalid clone mask"):
        super().__init__(detail=detail, exit_code=1, error_code="CLONE_MASK_ERROR")


class PoissonConvergenceError(MorphForgeException):
    """Conjugate gradient did not reach the residual target."""

    def __init__(self, residual: float, detail: str = "Poisson solver did not converge"):
        self.residual = residual
        super().__init__(
            detail=f"{detail} (residual {residual:.3e})",
            exit_code=1,
            error_code="POISSON_NOT_CONVERGED",
        )


class NetworkError(MorphForgeException):
    """Feature extractor network is inconsistent with its input."""

    def __init__(self, detail: str = "Network error"):
        super().__init__(detail=detail, exit_code=1, error_code="NETWORK_ERROR")


class ContainerFormatError(MorphForgeException):
    """Binary tensor container is malformed."""

    def __init__(self, detail: str = "Malformed tensor container"):
        super().__init__(detail=detail, exit_code=2, error_code="CONTAINER_FORMAT_ERROR")


class OptimizerError(MorphForgeException):
    """Optimizer cannot start or continue."""

    def __init__(self, detail: str = "Optimizer failure"):
        super().__init__(detail=detail, exit_code=1, error_code="OPTIMIZER_ERROR")


class FeatureError(MorphForgeException):
    """Feature extraction failed or scheme mismatch."""

    def __init__(self, detail: str = "Feature extraction failed"):
        super().__init__(detail=detail, exit_code=1, error_code="FEATURE_ERROR")


class TrainingError(MorphForgeException):
    """Detector training failed."""

    def __init__(self, detail: str = "Training failed"):
        super().__init__(detail=detail, exit_code=1, error_code="TRAINING_ERROR")


class MetricsError(MorphForgeException):
    """Metric inputs violate their preconditions."""

    def __init__(self, detail: str = "Invalid metric input"):
        super().__init__(detail=detail, exit_code=1, error_code="METRICS_ERROR")


class ManifestError(MorphForgeException):
    """Manifest is malformed or inconsistent."""

    def __init__(self, detail: str = "Invalid manifest"):
        super().__init__(detail=detail, exit_code=2, error_code="MANIFEST_ERROR")


class PairingError(MorphForgeException):
    """No compatible morph pair can be formed."""

    def __init__(self, detail: str = "No compatible pair"):
        super().__init__(detail=detail, exit_code=1, error_code="PAIRING_ERROR")


class ConfigError(MorphForgeException):
    """Run configuration is invalid."""

    def __init__(self, detail: str = "Invalid configuration"):
        super().__init__(detail=detail, exit_code=2, error_code="CONFIG_ERROR")
