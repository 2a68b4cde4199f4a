"""Dataset ingestion, preprocessing, mirror augmentation, and fold construction.

Preprocessing turns raw paired captures into square 128x128 rasters with
normalized annotations. Mirror augmentation is stored as a flag on the
record (images are flipped at load time), which keeps the manifest the
single source of truth. Fold construction groups subjects by ascending ID
so a subject's images never straddle the train/validation/test split.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path

import cv2
import numpy as np

from .core import (
    INPUT_SIZE,
    BoundaryBox,
    FaceImage,
    LandmarkSet,
    SampleRecord,
    Spectrum,
    Variation,
    flip_permutation,
    tight_box,
)

log = logging.getLogger(__name__)

DEFAULT_NAME_PATTERN = r"^(?P<spectrum>VIS|TH)_(?P<subject>\d+)(?:_\d+)*_(?P<variation>[A-Za-z]+)$"
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}


@dataclass(frozen=True)
class Fold:
    """One cross-validation iteration: group indices by role."""

    test_group: int
    val_groups: tuple[int, int]
    train_groups: tuple[int, ...]


@dataclass(frozen=True)
class FoldPlan:
    """10 subject groups and the 10 folds rotating the test group through them."""

    groups: tuple[tuple[int, ...], ...]
    folds: tuple[Fold, ...]

    def subjects(self, group_indices) -> set[int]:
        out: set[int] = set()
        for g in group_indices:
            out.update(self.groups[g])
        return out

    def split_subjects(self, k: int) -> tuple[set[int], set[int], set[int]]:
        """(train, val, test) subject-ID sets for fold k."""
        fold = self.folds[k]
        return (
            self.subjects(fold.train_groups),
            self.subjects(fold.val_groups),
            self.subjects([fold.test_group]),
        )


def build_folds(subject_ids) -> FoldPlan:
    """Partition subjects into 10 ascending-ID groups and rotate folds over them.

    Fold k tests on group k and validates on the two cyclically following
    groups; the remaining 7 train.
    """
    ids = sorted(set(int(s) for s in subject_ids))
    if len(ids) != len(list(subject_ids)):
        raise ValueError("duplicate subject IDs")
    if len(ids) == 0 or len(ids) % 10 != 0:
        raise ValueError(f"subject count must be a positive multiple of 10, got {len(ids)}")
    size = len(ids) // 10
    groups = tuple(tuple(ids[i * size:(i + 1) * size]) for i in range(10))
    folds = []
    for k in range(10):
        val = ((k + 1) % 10, (k + 2) % 10)
        train = tuple(g for g in range(10) if g != k and g not in val)
        folds.append(Fold(test_group=k, val_groups=val, train_groups=train))
    return FoldPlan(groups=groups, folds=tuple(folds))


def assign_fold_groups(subject_ids) -> dict[int, int]:
    """Map each subject to its group index (ascending-ID blocks)."""
    ids = sorted(set(int(s) for s in subject_ids))
    n = len(ids)
    return {sid: (rank * 10) // n for rank, sid in enumerate(ids)}


def crop_square(
    img: FaceImage,
    boundary: BoundaryBox | None,
    landmarks: LandmarkSet | None = None,
) -> tuple[FaceImage, BoundaryBox | None, LandmarkSet | None]:
    """Crop to a 1:1 window of side min(H, W) that fully contains the face.

    The window is centered on the boundary center and clamped to the image
    extent; with no boundary a center crop is used. Coordinates are
    re-normalized to the crop window.
    """
    h, w = img.height, img.width
    side = min(h, w)
    if boundary is not None:
        bw_px = boundary.w * w
        bh_px = boundary.h * h
        if bw_px > side + 1e-6 or bh_px > side + 1e-6:
            raise ValueError("face exceeds croppable square")
        cx = (boundary.x + boundary.w / 2) * w
        cy = (boundary.y + boundary.h / 2) * h
        x0 = int(np.clip(round(cx - side / 2), 0, w - side))
        y0 = int(np.clip(round(cy - side / 2), 0, h - side))
    else:
        x0 = (w - side) // 2
        y0 = (h - side) // 2

    cropped = FaceImage(
        pixels=img.pixels[y0:y0 + side, x0:x0 + side],
        spectrum=img.spectrum,
        subject_id=img.subject_id,
        variation=img.variation,
        mirrored=img.mirrored,
    )

    def remap(pts: np.ndarray) -> np.ndarray:
        out = pts.copy()
        out[:, 0] = (out[:, 0] * w - x0) / side
        out[:, 1] = (out[:, 1] * h - y0) / side
        return out

    new_boundary = None
    if boundary is not None:
        corners = np.array([[boundary.x, boundary.y], [boundary.x + boundary.w, boundary.y + boundary.h]])
        c = remap(corners)
        new_boundary = BoundaryBox(float(c[0, 0]), float(c[0, 1]), float(c[1, 0] - c[0, 0]), float(c[1, 1] - c[0, 1]))
    new_landmarks = None
    if landmarks is not None:
        new_landmarks = LandmarkSet(remap(landmarks.points))
    return cropped, new_boundary, new_landmarks


def resize_input(img: FaceImage, size: int = INPUT_SIZE) -> FaceImage:
    """Bilinear resize of a square image to the model input size.

    Normalized coordinates are fractions, so they are unchanged by resizing.
    """
    h, w = img.height, img.width
    if h != w:
        raise ValueError(f"resize_input requires a square image, got {h}x{w}")
    if h == size:
        return img
    px = cv2.resize(img.pixels, (size, size), interpolation=cv2.INTER_LINEAR)
    return replace(img, pixels=px)


_MIRROR_SUFFIX = "-m"


def mirror_sample(rec: SampleRecord) -> SampleRecord:
    """Horizontal-flip counterpart of a calibrated record.

    Landmark x coordinates become 1 - x, point indices are remapped with the
    canonical flip permutation, and the boundary is recomputed from the
    flipped points. The image flip itself happens at load time via the
    ``mirrored`` flag.
    """
    if rec.landmarks is None:
        raise ValueError("mirror_sample requires a record with landmarks")
    perm = flip_permutation()
    pts = rec.landmarks.points[perm].copy()
    pts[:, 0] = 1.0 - pts[:, 0]
    lms = LandmarkSet(pts)
    if rec.record_id.endswith(_MIRROR_SUFFIX):
        rid = rec.record_id[: -len(_MIRROR_SUFFIX)]
    else:
        rid = rec.record_id + _MIRROR_SUFFIX
    return replace(
        rec,
        record_id=rid,
        mirrored=not rec.mirrored,
        landmarks=lms,
        boundary=tight_box(lms),
    )


def mirror_all(records) -> list[SampleRecord]:
    """Original records followed by their mirrored counterparts."""
    out = list(records)
    out.extend(mirror_sample(r) for r in records)
    return out


def filter_usable(records) -> list[SampleRecord]:
    """Mark VIS images of the all-lights-off variation unusable; keep every TH image.

    Records stay in the manifest (the TH side is still trained on); only the
    ``usable_vis`` flag changes.
    """
    return [replace(r, usable_vis=(r.variation != Variation.LD)) for r in records]


def total_image_count(records) -> int:
    return 2 * len(list(records))


def usable_image_count(records) -> int:
    return sum(2 if r.usable_vis else 1 for r in records)


def load_vis_th_layout(root, name_pattern: str = DEFAULT_NAME_PATTERN) -> list[SampleRecord]:
    """Scan a directory of paired images and build an un-annotated manifest.

    Filenames must encode spectrum, subject, and variation via the named
    captures of ``name_pattern``. Files whose names do not parse and images
    lacking a counterpart in the other spectrum are reported and skipped.
    """
    root = Path(root)
    pattern = re.compile(name_pattern)
    files = sorted(p for p in root.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise ValueError(f"no images found under {root}")

    found: dict[tuple[int, Variation], dict[Spectrum, Path]] = {}
    for p in files:
        m = pattern.match(p.stem)
        if not m:
            log.warning("unparsable filename skipped: %s", p.name)
            continue
        try:
            spectrum = Spectrum(m.group("spectrum"))
            variation = Variation(m.group("variation"))
        except ValueError:
            log.warning("unknown spectrum or variation in filename: %s", p.name)
            continue
        subject = int(m.group("subject"))
        slot = found.setdefault((subject, variation), {})
        if spectrum in slot:
            log.warning("duplicate %s image for subject %d %s: %s", spectrum.value, subject, variation.value, p.name)
            continue
        slot[spectrum] = p

    paired = {k: v for k, v in found.items() if Spectrum.VIS in v and Spectrum.TH in v}
    for (subject, variation), v in sorted(found.items()):
        if (subject, variation) not in paired:
            missing = Spectrum.VIS if Spectrum.TH in v else Spectrum.TH
            log.warning("unpaired capture skipped: subject %d %s missing %s", subject, variation.value, missing.value)

    groups = assign_fold_groups({s for s, _ in paired})
    records = []
    for (subject, variation), v in sorted(paired.items()):
        records.append(
            SampleRecord(
                record_id=f"s{subject:03d}-{variation.value}",
                subject_id=subject,
                variation=variation,
                mirrored=False,
                vis_path=str(v[Spectrum.VIS]),
                th_path=str(v[Spectrum.TH]),
                landmarks=None,
                boundary=None,
                fold_group=groups[subject],
                calibrated=False,
                usable_vis=variation != Variation.LD,
            )
        )
    return records


def load_image(path, spectrum: Spectrum) -> np.ndarray:
    """Read an 8-bit image as float32 in [0, 1]; VIS as RGB (H, W, 3), TH as (H, W)."""
    path = str(path)
    if spectrum == Spectrum.TH:
        raw = cv2.imread(path, cv2.IMREAD_GRAYSCALE)
    else:
        raw = cv2.imread(path, cv2.IMREAD_COLOR)
        if raw is not None:
            raw = cv2.cvtColor(raw, cv2.COLOR_BGR2RGB)
    if raw is None:
        raise IOError(f"cannot read image: {path}")
    return raw.astype(np.float32) / 255.0


def load_face(rec: SampleRecord, spectrum: Spectrum, root=None) -> FaceImage:
    """Load one side of a record, applying the mirror flag."""
    path = rec.vis_path if spectrum == Spectrum.VIS else rec.th_path
    if root is not None and not Path(path).is_absolute():
        path = str(Path(root) / path)
    px = load_image(path, spectrum)
    if rec.mirrored:
        px = px[:, ::-1].copy()
    return FaceImage(
        pixels=px,
        spectrum=spectrum,
        subject_id=rec.subject_id,
        variation=rec.variation,
        mirrored=rec.mirrored,
    )
