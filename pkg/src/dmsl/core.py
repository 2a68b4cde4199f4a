"""Domain types and coordinate conventions shared by the whole toolkit.

Conventions
-----------
* Landmark and boundary coordinates are stored normalized to [0, 1]:
  x as a fraction of image width, y as a fraction of image height, both
  relative to the processed (square) image.
* Landmarks follow the 68-point Multi-PIE indexing. Point numbers are
  1-based in documentation ("point 37" is the right-eye outer corner) and
  0-based in arrays; every interface below states which it uses.
* Flattened landmark arrays interleave coordinates: [x1, y1, ..., x68, y68].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

N_POINTS = 68
FLAT_LEN = 2 * N_POINTS
INPUT_SIZE = 128  # side of the square raster the models consume

# 0-based indices of the outer eye corners (1-based: points 37 and 46).
RIGHT_EYE_OUTER = 36
LEFT_EYE_OUTER = 45


class Spectrum(str, Enum):
    """Capture spectrum of a face image."""

    VIS = "VIS"
    TH = "TH"


class Variation(str, Enum):
    """The 21 capture variations, keyed by acronym."""

    NN = "NN"      # neutral
    EH = "EH"      # happy
    EA = "EA"      # angry
    ES = "ES"      # sad
    ESP = "ESp"    # surprised
    AEC = "AEC"    # eyes closed
    AOM = "AOM"    # open mouth
    PU = "PU"      # look up
    PD = "PD"      # look down
    PL = "PL"      # look left
    PR = "PR"      # look right
    OOG = "OOG"    # optical glasses
    OSG = "OSG"    # sunglasses
    OH = "OH"      # hat
    OHM = "OHM"    # hand on mouth
    OHE = "OHE"    # hand on eye
    LLU = "LLU"    # light up
    LLR = "LLR"    # light right
    LLL = "LLL"    # light left
    LD = "LD"      # dark (all lights off; VIS unusable)
    LR = "LR"      # room light


VARIATION_KIND = {
    Variation.NN: "expression",
    Variation.EH: "expression",
    Variation.EA: "expression",
    Variation.ES: "expression",
    Variation.ESP: "expression",
    Variation.AEC: "action",
    Variation.AOM: "action",
    Variation.PU: "pose",
    Variation.PD: "pose",
    Variation.PL: "pose",
    Variation.PR: "pose",
    Variation.OOG: "occlusion",
    Variation.OSG: "occlusion",
    Variation.OH: "occlusion",
    Variation.OHM: "occlusion",
    Variation.OHE: "occlusion",
    Variation.LLU: "light",
    Variation.LLR: "light",
    Variation.LLL: "light",
    Variation.LD: "light",
    Variation.LR: "light",
}

# 0-based index ranges of the semantic landmark groups (start, stop exclusive).
LANDMARK_GROUPS = {
    "jaw": (0, 17),
    "brows": (17, 27),
    "nose": (27, 36),
    "eyes": (36, 48),
    "mouth": (48, 68),
}


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class LandmarkSet:
    """68 (x, y) landmark points, normalized to [0, 1].

    Ground-truth sets must lie inside the unit square; predictions may
    stray outside and are stored as-is (callers decide whether to check).
    """

    points: np.ndarray  # shape (68, 2), float64, columns (x, y)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.shape != (N_POINTS, 2):
            raise ValueError(f"expected {N_POINTS}x2 landmark array, got shape {pts.shape}")
        object.__setattr__(self, "points", _freeze(pts))

    def __eq__(self, other) -> bool:
        if not isinstance(other, LandmarkSet):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def flat(self) -> np.ndarray:
        """Interleaved [x1, y1, ..., x68, y68] copy, length 136."""
        return self.points.reshape(-1).copy()

    @classmethod
    def from_flat(cls, values) -> "LandmarkSet":
        arr = np.asarray(values, dtype=np.float64).reshape(-1)
        if arr.shape[0] != FLAT_LEN:
            raise ValueError(f"flattened landmarks must have {FLAT_LEN} values, got {arr.shape[0]}")
        return cls(arr.reshape(N_POINTS, 2))

    def in_unit_range(self, eps: float = 0.0) -> bool:
        return bool(np.all(self.points >= -eps) and np.all(self.points <= 1.0 + eps))

    def require_unit_range(self):
        if not self.in_unit_range():
            bad = np.where((self.points < 0) | (self.points > 1))[0]
            raise ValueError(f"landmark coordinates outside [0, 1] at 0-based points {sorted(set(bad.tolist()))}")


def flatten_landmarks(l: LandmarkSet) -> np.ndarray:
    """Flatten a LandmarkSet to the canonical 136-value interleaved array."""
    return l.flat()


def unflatten_landmarks(values) -> LandmarkSet:
    """Inverse of :func:`flatten_landmarks`; rejects arrays of wrong length."""
    return LandmarkSet.from_flat(values)


@dataclass(frozen=True)
class BoundaryBox:
    """Tight face bounding box: top-left (x, y) plus width and height, all in [0, 1]."""

    x: float
    y: float
    w: float
    h: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.w, self.h], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "BoundaryBox":
        arr = np.asarray(values, dtype=np.float64).reshape(-1)
        if arr.shape[0] != 4:
            raise ValueError(f"boundary box needs 4 values, got {arr.shape[0]}")
        return cls(*(float(v) for v in arr))

    def validate_ground_truth(self, eps: float = 1e-6):
        """Ground-truth boxes must be positive-area and contained in the unit square."""
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"ground-truth box must have positive area, got w={self.w}, h={self.h}")
        if self.x < -eps or self.y < -eps or self.x + self.w > 1 + eps or self.y + self.h > 1 + eps:
            raise ValueError(f"ground-truth box exceeds unit square: {self}")


@dataclass(frozen=True, eq=False)
class FaceImage:
    """A single face raster with capture metadata.

    Pixels are floats in [0, 1], shape (H, W) for single-channel images or
    (H, W, 3) for RGB. TH images are single-channel; VIS images may be RGB
    and are converted to grayscale before entering a model.
    """

    pixels: np.ndarray
    spectrum: Spectrum
    subject_id: int
    variation: Variation
    mirrored: bool = False

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.ndim not in (2, 3) or (px.ndim == 3 and px.shape[2] != 3):
            raise ValueError(f"pixels must be (H, W) or (H, W, 3), got shape {px.shape}")
        px = px.copy()
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def to_gray(self) -> "FaceImage":
        """Collapse RGB to single-channel luma; no-op for grayscale images."""
        if self.pixels.ndim == 2:
            return self
        gray = (
            0.299 * self.pixels[..., 0]
            + 0.587 * self.pixels[..., 1]
            + 0.114 * self.pixels[..., 2]
        ).astype(np.float32)
        return replace(self, pixels=gray)


@dataclass(frozen=True)
class SampleRecord:
    """One manifest row binding a registered VIS/TH image pair to its annotations."""

    record_id: str
    subject_id: int
    variation: Variation
    mirrored: bool
    vis_path: str
    th_path: str
    landmarks: LandmarkSet | None
    boundary: BoundaryBox | None
    fold_group: int
    calibrated: bool
    usable_vis: bool

    def to_json_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "subject_id": self.subject_id,
            "variation": self.variation.value,
            "mirrored": self.mirrored,
            "vis_path": self.vis_path,
            "th_path": self.th_path,
            "landmarks": None if self.landmarks is None else self.landmarks.flat().tolist(),
            "boundary": None if self.boundary is None else self.boundary.as_array().tolist(),
            "fold_group": self.fold_group,
            "calibrated": self.calibrated,
            "usable_vis": self.usable_vis,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SampleRecord":
        return cls(
            record_id=d["record_id"],
            subject_id=int(d["subject_id"]),
            variation=Variation(d["variation"]),
            mirrored=bool(d["mirrored"]),
            vis_path=d["vis_path"],
            th_path=d["th_path"],
            landmarks=None if d["landmarks"] is None else LandmarkSet.from_flat(d["landmarks"]),
            boundary=None if d["boundary"] is None else BoundaryBox.from_array(d["boundary"]),
            fold_group=int(d["fold_group"]),
            calibrated=bool(d["calibrated"]),
            usable_vis=bool(d["usable_vis"]),
        )


def write_manifest(records, path):
    """Write records as JSON Lines, one record per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec.to_json_dict()) + "\n")


def read_manifest(path) -> list[SampleRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(SampleRecord.from_json_dict(json.loads(line)))
    return records


def _flip_pairs_1based() -> list[tuple[int, int]]:
    pairs = []
    # jaw: 1..17 reverses onto itself (9, the chin center, stays put)
    pairs += [(i, 18 - i) for i in range(1, 9)]
    # brows: 18..22 <-> 27..23
    pairs += [(17 + i, 28 - i) for i in range(1, 6)]
    # nostrils: 32..36 reverses around 34
    pairs += [(32, 36), (33, 35)]
    # eyes: 37..42 <-> 46, 45, 44, 43, 48, 47
    pairs += [(37, 46), (38, 45), (39, 44), (40, 43), (41, 48), (42, 47)]
    # outer mouth: corners 49/55, upper lip 50..54, lower lip 56..60
    pairs += [(49, 55), (50, 54), (51, 53), (56, 60), (57, 59)]
    # inner mouth: corners 61/65, 62..64 upper, 66..68 lower
    pairs += [(61, 65), (62, 64), (66, 68)]
    return pairs


def flip_permutation() -> np.ndarray:
    """Canonical 68-point horizontal-flip permutation (0-based, involution).

    ``mirrored_points[i] = reflect(points[perm[i]])`` keeps point semantics
    under a horizontal flip, e.g. the right-eye outer corner (1-based point
    37) swaps with the left-eye outer corner (point 46).
    """
    perm = np.arange(N_POINTS)
    for a, b in _flip_pairs_1based():
        perm[a - 1], perm[b - 1] = b - 1, a - 1
    return perm


def tight_box(l: LandmarkSet) -> BoundaryBox:
    """Tight bounding box of a landmark set (degenerate sets rejected)."""
    xs = l.points[:, 0]
    ys = l.points[:, 1]
    w = float(xs.max() - xs.min())
    h = float(ys.max() - ys.min())
    if w <= 0 or h <= 0:
        raise ValueError("degenerate landmark set")
    return BoundaryBox(float(xs.min()), float(ys.min()), w, h)


def check_tight_box(rec: SampleRecord, tol: float = 1e-9) -> bool:
    """Cross-type invariant: a record's boundary is the tight box of its landmarks."""
    if rec.landmarks is None or rec.boundary is None:
        return rec.landmarks is None and rec.boundary is None
    expect = tight_box(rec.landmarks)
    return bool(np.allclose(expect.as_array(), rec.boundary.as_array(), atol=tol))
