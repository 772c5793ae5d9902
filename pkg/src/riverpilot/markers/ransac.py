"""Robust homography estimation: RANSAC over normalized DLT fits."""

from __future__ import annotations

import math

import numpy as np

from riverpilot.geometry import Homography


class InsufficientCorrespondences(ValueError):
    pass


class NoConsensus(RuntimeError):
    """No 4-point sample explained at least 4 correspondences."""


def _normalize(pts: np.ndarray):
    """Hartley conditioning: centroid to origin, mean distance to sqrt(2)."""
    centroid = pts.mean(axis=0)
    dist = np.sqrt(((pts - centroid) ** 2).sum(axis=1)).mean()
    scale = math.sqrt(2.0) / dist if dist > 1e-12 else 1.0
    t = np.array(
        [
            [scale, 0.0, -scale * centroid[0]],
            [0.0, scale, -scale * centroid[1]],
            [0.0, 0.0, 1.0],
        ]
    )
    return (pts - centroid) * scale, t


def _dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray | None:
    src_n, t_src = _normalize(src)
    dst_n, t_dst = _normalize(dst)
    n = len(src)
    a = np.zeros((2 * n, 9))
    x, y = src_n[:, 0], src_n[:, 1]
    u, v = dst_n[:, 0], dst_n[:, 1]
    a[0::2, 0] = -x
    a[0::2, 1] = -y
    a[0::2, 2] = -1.0
    a[0::2, 6] = u * x
    a[0::2, 7] = u * y
    a[0::2, 8] = u
    a[1::2, 3] = -x
    a[1::2, 4] = -y
    a[1::2, 5] = -1.0
    a[1::2, 6] = v * x
    a[1::2, 7] = v * y
    a[1::2, 8] = v
    try:
        _, s, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError:
        return None
    h = vt[-1].reshape(3, 3)
    if not np.all(np.isfinite(h)) or abs(np.linalg.det(h)) < 1e-15:
        return None
    return np.linalg.inv(t_dst) @ h @ t_src


def _reprojection_errors(h: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    q = src @ h[:, :2].T + h[:, 2]
    w = q[:, 2]
    bad = np.abs(w) < 1e-12
    w = np.where(bad, 1.0, w)
    proj = q[:, :2] / w[:, None]
    err = np.sqrt(((proj - dst) ** 2).sum(axis=1))
    err[bad] = np.inf
    return err


def _degenerate_sample(pts: np.ndarray) -> bool:
    # Any three of the four points (nearly) collinear ruins the fit.
    for skip in range(4):
        tri = np.delete(pts, skip, axis=0)
        area = abs(
            (tri[1, 0] - tri[0, 0]) * (tri[2, 1] - tri[0, 1])
            - (tri[1, 1] - tri[0, 1]) * (tri[2, 0] - tri[0, 0])
        )
        span = np.abs(tri - tri.mean(axis=0)).max() + 1e-12
        if area < 1e-6 * span * span:
            return True
    return False


def estimate_homography_ransac(
    src: np.ndarray,
    dst: np.ndarray,
    *,
    threshold_px: float = 3.0,
    max_iters: int = 500,
    confidence: float = 0.99,
    seed: int = 0,
):
    """Fit dst = H(src) discarding outliers; returns (Homography, inlier mask)."""
    src = np.asarray(src, dtype=float)
    dst = np.asarray(dst, dtype=float)
    n = len(src)
    if n < 4 or len(dst) != n:
        raise InsufficientCorrespondences(f"need >= 4 pairs, got {n} and {len(dst)}")
    rng = np.random.default_rng(seed)
    best_count = 0
    best_mask = None
    needed = max_iters
    iteration = 0
    while iteration < min(needed, max_iters):
        iteration += 1
        pick = rng.choice(n, size=4, replace=False)
        if _degenerate_sample(src[pick]) or _degenerate_sample(dst[pick]):
            continue
        h = _dlt(src[pick], dst[pick])
        if h is None:
            continue
        mask = _reprojection_errors(h, src, dst) < threshold_px
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask
            ratio = count / n
            if ratio >= 1.0:
                break
            denom = math.log(max(1e-12, 1.0 - ratio**4))
            needed = min(max_iters, math.ceil(math.log(1.0 - confidence) / denom))
    if best_mask is None or best_count < 4:
        raise NoConsensus(f"best sample explained {best_count} of {n}")
    refit = _dlt(src[best_mask], dst[best_mask])
    if refit is None:
        raise NoConsensus("inlier refit was degenerate")
    mask = _reprojection_errors(refit, src, dst) < threshold_px
    if int(mask.sum()) < 4:
        mask = best_mask
    return Homography(refit), mask
