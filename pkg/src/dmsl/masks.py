"""Supervision targets: landmark glow masks and boundary rectangle masks.

The glow mask adds, for every landmark, a contribution of
``0.5 ** chebyshev_distance(pixel, landmark) * 255`` to each pixel, skipping
pixels already at or above 255, then clamps to [0, 255] and rescales to
[0, 1]. Landmark pixel positions keep their fractional values when
distances are computed. :func:`landmark_mask` truncates each glow at a
Chebyshev radius (beyond radius 12 a single contribution is below 0.07,
i.e. under 8-bit quantization noise); :func:`landmark_mask_reference` is
the untruncated per-pixel accumulation the fast path is checked against.
"""

from __future__ import annotations

import numpy as np

from .core import BoundaryBox, LandmarkSet, tight_box

GLOW_RADIUS = 12


def _landmark_pixels(l: LandmarkSet, dim_x: int, dim_y: int) -> np.ndarray:
    pts = l.points
    if np.any(pts < 0) or np.any(pts > 1):
        raise ValueError("landmark out of frame for mask generation")
    scaled = pts.copy()
    scaled[:, 0] *= dim_x
    scaled[:, 1] *= dim_y
    return scaled


def landmark_mask(l: LandmarkSet, dim_x: int, dim_y: int, radius: int = GLOW_RADIUS) -> np.ndarray:
    """Glow mask of shape (dim_y, dim_x) with values in [0, 1].

    Matches :func:`landmark_mask_reference` within 0.5/255 per pixel;
    landmarks are processed in point order so the >=255 guard saturates
    identically on both paths.
    """
    if dim_x < 1 or dim_y < 1:
        raise ValueError("mask dimensions must be >= 1")
    scaled = _landmark_pixels(l, dim_x, dim_y)
    mask = np.zeros((dim_y, dim_x), dtype=np.float64)
    for x, y in scaled:
        j0 = max(0, int(np.ceil(x - radius)))
        j1 = min(dim_x - 1, int(np.floor(x + radius)))
        k0 = max(0, int(np.ceil(y - radius)))
        k1 = min(dim_y - 1, int(np.floor(y + radius)))
        if j0 > j1 or k0 > k1:
            continue
        dx = np.abs(x - np.arange(j0, j1 + 1))
        dy = np.abs(y - np.arange(k0, k1 + 1))
        cheb = np.maximum(dx[None, :], dy[:, None])
        contrib = np.power(0.5, cheb) * 255.0
        win = mask[k0:k1 + 1, j0:j1 + 1]
        mask[k0:k1 + 1, j0:j1 + 1] = np.where(win < 255.0, win + contrib, win)
    return np.clip(mask, 0.0, 255.0) / 255.0


def landmark_mask_reference(l: LandmarkSet, dim_x: int, dim_y: int) -> np.ndarray:
    """Untruncated glow mask: every landmark sweeps the full raster.

    Per landmark, each pixel below 255 receives the full
    ``0.5 ** chebyshev * 255`` contribution regardless of distance.
    """
    scaled = _landmark_pixels(l, dim_x, dim_y)
    mask = np.zeros((dim_y, dim_x), dtype=np.float64)
    cols = np.arange(dim_x, dtype=np.float64)
    rows = np.arange(dim_y, dtype=np.float64)
    for x, y in scaled:
        cheb = np.maximum(np.abs(x - cols)[None, :], np.abs(y - rows)[:, None])
        contrib = np.power(0.5, cheb) * 255.0
        mask = np.where(mask < 255.0, mask + contrib, mask)
    return np.clip(mask, 0.0, 255.0) / 255.0


def rect_pixels(b: BoundaryBox, dim_x: int, dim_y: int) -> tuple[int, int, int, int]:
    """Half-open pixel rectangle (x0, x1, y0, y1), bounds rounded to nearest pixel."""
    x0 = int(np.rint(b.x * dim_x))
    x1 = int(np.rint((b.x + b.w) * dim_x))
    y0 = int(np.rint(b.y * dim_y))
    y1 = int(np.rint((b.y + b.h) * dim_y))
    x0, x1 = max(0, x0), min(dim_x, x1)
    y0, y1 = max(0, y0), min(dim_y, y1)
    return x0, x1, y0, y1


def boundary_mask(b: BoundaryBox, dim_x: int, dim_y: int) -> np.ndarray:
    """Binary mask of shape (dim_y, dim_x): 1.0 inside the box rectangle, 0.0 outside."""
    if b.w <= 0 or b.h <= 0:
        raise ValueError(f"zero-area boundary box: w={b.w}, h={b.h}")
    mask = np.zeros((dim_y, dim_x), dtype=np.float64)
    x0, x1, y0, y1 = rect_pixels(b, dim_x, dim_y)
    mask[y0:y1, x0:x1] = 1.0
    return mask


def boundary_from_landmarks(l: LandmarkSet) -> BoundaryBox:
    """Tight bounding box of the landmark set: leftmost/topmost corner plus extents."""
    return tight_box(l)


def save_mask_png(mask: np.ndarray, path):
    """Export a [0, 1] mask as an 8-bit grayscale PNG (value = round(v * 255))."""
    import cv2

    arr = np.rint(np.clip(mask, 0.0, 1.0) * 255.0).astype(np.uint8)
    if not cv2.imwrite(str(path), arr):
        raise IOError(f"failed to write mask to {path}")
