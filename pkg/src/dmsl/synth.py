"""Deterministic synthetic VIS/TH face pairs with exact landmark ground truth.

A procedural 68-point face template is perturbed per subject (identity) and
per variation (expression, pose, action), then rasterized twice: a visible
rendering with edges, shading, lighting gradients, and drawn occluders, and
a thermal rendering made of smooth blobs compressed into a narrow intensity
range. The landmarks used for rasterization are stored unchanged, so the
ground truth is exact by construction. Useful for end-to-end runs and tests
when no real paired dataset is on disk.
"""

from __future__ import annotations

import json
from pathlib import Path

import cv2
import numpy as np

from .core import (
    BoundaryBox,
    LandmarkSet,
    SampleRecord,
    Spectrum,
    Variation,
    tight_box,
)
from .dataset import assign_fold_groups

ALL_VARIATIONS = tuple(Variation)


def template_landmarks() -> np.ndarray:
    """Symmetric canonical 68-point layout in normalized coordinates."""
    cx, cy = 0.5, 0.48
    pts = np.zeros((68, 2))

    # jaw 0..16: lower face arc from left temple through the chin
    phi = np.pi * (1 + np.arange(17) / 16)
    pts[0:17, 0] = cx + 0.26 * np.cos(phi)
    pts[0:17, 1] = cy - 0.33 * np.sin(phi)

    # brows 17..26
    arch = np.array([0.0, 0.012, 0.018, 0.012, 0.0])
    off = np.array([0.20, 0.16, 0.12, 0.08, 0.04])
    pts[17:22, 0] = cx - off
    pts[17:22, 1] = cy - 0.16 - arch
    pts[22:27, 0] = cx + off[::-1]
    pts[22:27, 1] = cy - 0.16 - arch[::-1]

    # nose bridge 27..30 and nostril row 31..35
    pts[27:31, 0] = cx
    pts[27:31, 1] = cy + np.array([-0.12, -0.07, -0.02, 0.03])
    pts[31:36, 0] = cx + np.array([-0.045, -0.022, 0.0, 0.022, 0.045])
    pts[31:36, 1] = cy + 0.07 + np.array([0.0, 0.004, 0.006, 0.004, 0.0])

    # eyes 36..47 (right eye then left eye, flip-consistent ordering)
    ex, ey = cx - 0.115, cy - 0.085
    right = np.array([
        [ex - 0.048, ey],
        [ex - 0.020, ey - 0.016],
        [ex + 0.016, ey - 0.016],
        [ex + 0.048, ey],
        [ex + 0.016, ey + 0.014],
        [ex - 0.020, ey + 0.014],
    ])
    pts[36:42] = right
    left = right[[3, 2, 1, 0, 5, 4]].copy()
    left[:, 0] = 2 * cx - left[:, 0]
    pts[42:48] = left

    # mouth 48..67: outer ring then inner ring
    mx, my = cx, cy + 0.175
    pts[48:60] = np.array([
        [mx - 0.065, my],
        [mx - 0.042, my - 0.022],
        [mx - 0.016, my - 0.030],
        [mx, my - 0.028],
        [mx + 0.016, my - 0.030],
        [mx + 0.042, my - 0.022],
        [mx + 0.065, my],
        [mx + 0.042, my + 0.028],
        [mx + 0.018, my + 0.038],
        [mx, my + 0.040],
        [mx - 0.018, my + 0.038],
        [mx - 0.042, my + 0.028],
    ])
    pts[60:68] = np.array([
        [mx - 0.035, my + 0.002],
        [mx - 0.015, my - 0.008],
        [mx, my - 0.010],
        [mx + 0.015, my - 0.008],
        [mx + 0.035, my + 0.002],
        [mx + 0.015, my + 0.012],
        [mx, my + 0.014],
        [mx - 0.015, my + 0.012],
    ])
    return pts


def _subject_params(seed: int, subject_id: int) -> dict:
    rng = np.random.default_rng([seed, subject_id])
    return {
        "scale": rng.uniform(0.90, 1.08),
        "aspect": rng.uniform(0.94, 1.06),
        "dx": rng.uniform(-0.02, 0.02),
        "dy": rng.uniform(-0.02, 0.02),
        "jitter": rng.normal(0.0, 0.003, size=(68, 2)),
    }


def _apply_variation(pts: np.ndarray, variation: Variation) -> np.ndarray:
    out = pts.copy()
    cx = 0.5
    v = variation
    if v == Variation.EH:
        out[[48, 60], 0] -= 0.012
        out[[54, 64], 0] += 0.012
        out[[48, 54, 60, 64], 1] -= 0.008
    elif v == Variation.EA:
        out[[21, 22], 1] += 0.012
        out[21, 0] += 0.006
        out[22, 0] -= 0.006
    elif v == Variation.ES:
        out[[48, 54, 60, 64], 1] += 0.012
    elif v == Variation.ESP:
        out[17:27, 1] -= 0.015
        out[[65, 66, 67], 1] += 0.020
        out[55:60, 1] += 0.015
        out[6:11, 1] += 0.010
    elif v == Variation.AEC:
        for base in (36, 42):
            ey = (out[base, 1] + out[base + 3, 1]) / 2
            out[base + 1:base + 3, 1] = ey - 0.002
            out[base + 4:base + 6, 1] = ey + 0.002
    elif v == Variation.AOM:
        out[[65, 66, 67], 1] += 0.035
        out[55:60, 1] += 0.030
        out[5:12, 1] += 0.020
    elif v == Variation.PU:
        out[:, 1] = 0.48 + (out[:, 1] - 0.48) * 0.94 - 0.018
    elif v == Variation.PD:
        out[:, 1] = 0.48 + (out[:, 1] - 0.48) * 0.94 + 0.018
    elif v == Variation.PL:
        out[:, 0] = cx + (out[:, 0] - cx) * 0.90 - 0.030
    elif v == Variation.PR:
        out[:, 0] = cx + (out[:, 0] - cx) * 0.90 + 0.030
    return out


def sample_landmarks(seed: int, subject_id: int, variation: Variation) -> LandmarkSet:
    """Exact landmark geometry for one synthetic capture."""
    p = _subject_params(seed, subject_id)
    pts = template_landmarks()
    center = np.array([0.5, 0.48])
    pts = center + (pts - center) * np.array([p["scale"], p["scale"] * p["aspect"]])
    pts += np.array([p["dx"], p["dy"]])
    pts += p["jitter"]
    pts = _apply_variation(pts, variation)
    vi = list(Variation).index(variation)
    rng = np.random.default_rng([seed, subject_id, vi])
    pts += rng.normal(0.0, 0.0025, size=pts.shape)
    return LandmarkSet(np.clip(pts, 0.03, 0.97))


def _px(pts: np.ndarray, size: int) -> np.ndarray:
    return np.rint(pts * size).astype(np.int32)


def _face_outline(pts: np.ndarray) -> np.ndarray:
    """Jaw arc closed over a forehead arc (for fill polygons)."""
    jaw = pts[0:17]
    brow_y = pts[17:27, 1].min()
    top = brow_y - 0.10
    forehead = []
    for t in np.linspace(0, 1, 7):
        x = jaw[16, 0] + (jaw[0, 0] - jaw[16, 0]) * t
        bulge = np.sin(t * np.pi)
        forehead.append([x, jaw[16, 1] * (1 - t) + jaw[0, 1] * t - bulge * (jaw[0, 1] - top)])
    return np.vstack([jaw, np.array(forehead)])


def render_vis(l: LandmarkSet, variation: Variation, seed: int, subject_id: int, size: int = 128) -> np.ndarray:
    """Visible-spectrum rendering as uint8 RGB."""
    vi = list(Variation).index(variation)
    rng = np.random.default_rng([seed, subject_id, vi, 1])
    pts = l.points

    if variation == Variation.LD:
        img = rng.normal(3.0, 1.5, size=(size, size, 3))
        return np.clip(img, 0, 255).astype(np.uint8)

    img = np.full((size, size, 3), 46.0, dtype=np.float64)
    yy, xx = np.mgrid[0:size, 0:size] / size
    if variation == Variation.LLU:
        img += (1 - yy)[..., None] * 50
    elif variation == Variation.LLL:
        img += (1 - xx)[..., None] * 50
    elif variation == Variation.LLR:
        img += xx[..., None] * 50
    elif variation == Variation.LR:
        img += 25
    img = np.clip(img, 0, 255).astype(np.uint8)

    skin = (198, 168, 140)
    outline = _px(_face_outline(pts), size)
    cv2.fillPoly(img, [outline], skin)

    # brows
    for s0, s1 in ((17, 22), (22, 27)):
        cv2.polylines(img, [_px(pts[s0:s1], size)], False, (70, 45, 32), 2)
    # eyes: white sclera, dark pupil (skip pupil when eyes closed)
    for base in (36, 42):
        eye = _px(pts[base:base + 6], size)
        cv2.fillPoly(img, [eye], (235, 235, 232))
        cv2.polylines(img, [eye], True, (60, 42, 32), 1)
        if variation != Variation.AEC:
            c = eye.mean(axis=0).astype(np.int32)
            cv2.circle(img, (int(c[0]), int(c[1])), max(1, size // 64), (30, 22, 18), -1)
    # nose
    cv2.polylines(img, [_px(pts[27:31], size)], False, (120, 95, 78), 1)
    cv2.polylines(img, [_px(pts[31:36], size)], False, (110, 85, 70), 1)
    # mouth
    cv2.fillPoly(img, [_px(pts[48:60], size)], (150, 70, 62))
    cv2.fillPoly(img, [_px(pts[60:68], size)], (90, 35, 32))

    # occluders drawn on top; landmark ground truth is unaffected
    if variation in (Variation.OOG, Variation.OSG):
        filled = variation == Variation.OSG
        color = (25, 25, 28) if filled else (40, 40, 45)
        for base in (36, 42):
            c = _px(pts[base:base + 6], size).mean(axis=0).astype(np.int32)
            r = int(size * 0.075)
            cv2.circle(img, (int(c[0]), int(c[1])), r, color, -1 if filled else 2)
        b0 = _px(pts[39:40], size)[0]
        b1 = _px(pts[42:43], size)[0]
        cv2.line(img, (int(b0[0]), int(b0[1] - 2)), (int(b1[0]), int(b1[1] - 2)), color, 2)
    elif variation == Variation.OH:
        brow_y = int(pts[17:27, 1].min() * size)
        x0, x1 = int(pts[0, 0] * size) - 4, int(pts[16, 0] * size) + 4
        cv2.rectangle(img, (x0, max(0, brow_y - size // 4)), (x1, brow_y - 3), (52, 48, 70), -1)
    elif variation == Variation.OHM:
        c = _px(pts[48:68], size).mean(axis=0).astype(np.int32)
        cv2.ellipse(img, (int(c[0]), int(c[1])), (size // 7, size // 10), 15, 0, 360, (190, 155, 128), -1)
    elif variation == Variation.OHE:
        c = _px(pts[36:42], size).mean(axis=0).astype(np.int32)
        cv2.ellipse(img, (int(c[0]), int(c[1])), (size // 8, size // 9), -20, 0, 360, (190, 155, 128), -1)

    noise = rng.normal(0.0, 2.0, size=img.shape)
    return np.clip(img.astype(np.float64) + noise, 0, 255).astype(np.uint8)


def render_th(l: LandmarkSet, variation: Variation, seed: int, subject_id: int, size: int = 128) -> np.ndarray:
    """Thermal rendering as uint8 grayscale: smooth blobs, narrow intensity range."""
    vi = list(Variation).index(variation)
    rng = np.random.default_rng([seed, subject_id, vi, 2])
    pts = l.points

    img = np.full((size, size), 90.0, dtype=np.float64)
    yy = np.mgrid[0:size, 0:size][0] / size
    img += yy * 10  # mild vertical ambient gradient

    outline = _px(_face_outline(pts), size)
    cv2.fillPoly(img, [outline], 185.0)
    for base in (36, 42):  # periocular regions run warm
        c = _px(pts[base:base + 6], size).mean(axis=0).astype(np.int32)
        cv2.circle(img, (int(c[0]), int(c[1])), max(2, int(size * 0.055)), 208.0, -1)
    tip = _px(pts[30:31], size)[0]
    cv2.circle(img, (int(tip[0]), int(tip[1])), max(2, int(size * 0.045)), 150.0, -1)
    cv2.fillPoly(img, [_px(pts[48:60], size)], 200.0)

    if variation in (Variation.OOG, Variation.OSG):
        # glass blocks long-wave emission: lenses image cold
        for base in (36, 42):
            c = _px(pts[base:base + 6], size).mean(axis=0).astype(np.int32)
            cv2.circle(img, (int(c[0]), int(c[1])), int(size * 0.075), 75.0, -1)
    elif variation == Variation.OH:
        brow_y = int(pts[17:27, 1].min() * size)
        x0, x1 = int(pts[0, 0] * size) - 4, int(pts[16, 0] * size) + 4
        cv2.rectangle(img, (x0, max(0, brow_y - size // 4)), (x1, brow_y - 3), 82.0, -1)
    elif variation == Variation.OHM:
        c = _px(pts[48:68], size).mean(axis=0).astype(np.int32)
        cv2.ellipse(img, (int(c[0]), int(c[1])), (size // 7, size // 10), 15, 0, 360, 172.0, -1)
    elif variation == Variation.OHE:
        c = _px(pts[36:42], size).mean(axis=0).astype(np.int32)
        cv2.ellipse(img, (int(c[0]), int(c[1])), (size // 8, size // 9), -20, 0, 360, 172.0, -1)

    k = max(3, (size // 16) | 1)
    img = cv2.GaussianBlur(img, (k, k), 0)
    lo, hi = img.min(), img.max()
    img = 70.0 + (img - lo) * (200.0 - 70.0) / max(hi - lo, 1e-9)
    img += rng.normal(0.0, 1.5, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def synth_records(n_subjects: int, seed: int, variations=None) -> list[SampleRecord]:
    """Manifest records only (no images on disk); paths are placeholder names."""
    if n_subjects < 1:
        raise ValueError("n_subjects must be >= 1")
    variations = tuple(variations) if variations is not None else ALL_VARIATIONS
    subjects = list(range(1, n_subjects + 1))
    groups = assign_fold_groups(subjects)
    records = []
    for sid in subjects:
        for var in variations:
            lms = sample_landmarks(seed, sid, var)
            records.append(
                SampleRecord(
                    record_id=f"s{sid:03d}-{var.value}",
                    subject_id=sid,
                    variation=var,
                    mirrored=False,
                    vis_path=f"images/VIS_{sid:03d}_{var.value}.png",
                    th_path=f"images/TH_{sid:03d}_{var.value}.png",
                    landmarks=lms,
                    boundary=tight_box(lms),
                    fold_group=groups[sid],
                    calibrated=True,
                    usable_vis=var != Variation.LD,
                )
            )
    return records


def synth_faces(n_subjects: int, seed: int, out_dir, variations=None, size: int = 128) -> list[SampleRecord]:
    """Generate paired images plus a manifest under ``out_dir``.

    Same (n_subjects, seed, variations, size) always produces bit-identical
    manifests and images.
    """
    out_dir = Path(out_dir)
    img_dir = out_dir / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for rec in synth_records(n_subjects, seed, variations):
        vis = render_vis(rec.landmarks, rec.variation, seed, rec.subject_id, size)
        th = render_th(rec.landmarks, rec.variation, seed, rec.subject_id, size)
        vis_path = out_dir / rec.vis_path
        th_path = out_dir / rec.th_path
        cv2.imwrite(str(vis_path), cv2.cvtColor(vis, cv2.COLOR_RGB2BGR))
        cv2.imwrite(str(th_path), th)
        records.append(
            SampleRecord(
                **{**rec.__dict__, "vis_path": str(vis_path), "th_path": str(th_path)}
            )
        )
    from .core import write_manifest

    write_manifest(records, out_dir / "manifest.jsonl")
    (out_dir / "meta.json").write_text(
        json.dumps(
            {
                "seed": seed,
                "n_subjects": n_subjects,
                "variations": [v.value for v in (variations or ALL_VARIATIONS)],
                "size": size,
            },
            indent=2,
        )
    )
    return records
