"""Multi-spectral (visible + thermal) facial landmark detection toolkit."""

from .core import (
    BoundaryBox,
    FaceImage,
    LandmarkSet,
    SampleRecord,
    Spectrum,
    Variation,
    flatten_landmarks,
    flip_permutation,
    read_manifest,
    tight_box,
    unflatten_landmarks,
    write_manifest,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryBox",
    "FaceImage",
    "LandmarkSet",
    "SampleRecord",
    "Spectrum",
    "Variation",
    "flatten_landmarks",
    "flip_permutation",
    "read_manifest",
    "tight_box",
    "unflatten_landmarks",
    "write_manifest",
    "__version__",
]
