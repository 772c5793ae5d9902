"""Marker identification in an observed frame: vote, match, verify."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from riverpilot.geometry import CameraIntrinsics, Homography
from riverpilot.markers.llah import DescriptorTable, query_keys
from riverpilot.markers.ransac import NoConsensus, estimate_homography_ransac
from riverpilot.markers.render import ObservedFrame

_RANSAC_SEED = 0x5EED  # detection itself is deterministic
_SIMILARITY_ITERS = 100
_SIMILARITY_GATE_PX = 30.0  # loose: perspective bends a similarity this much


def _similarity_filter(
    sheet_pts: np.ndarray, image_pts: np.ndarray, seed: int
) -> np.ndarray:
    """Keep candidate pairs consistent with one sheet->image similarity.

    Two genuine pairs determine scale, rotation and translation; every other
    genuine pair lands within the (generous) gate of that map, while hash
    collisions scatter across the frame.  Cheap 2-point consensus cleans the
    set before the homography fit sees it.
    """
    m = len(sheet_pts)
    if m < 5:
        return np.ones(m, dtype=bool)
    rng = np.random.default_rng(seed)
    best: np.ndarray | None = None
    best_count = 4
    gate2 = _SIMILARITY_GATE_PX**2
    for _ in range(_SIMILARITY_ITERS):
        i, j = rng.choice(m, size=2, replace=False)
        a = sheet_pts[j] - sheet_pts[i]
        b = image_pts[j] - image_pts[i]
        norm2 = a @ a
        if norm2 < 25.0 or b @ b < 9.0:
            continue
        cr = (a[0] * b[0] + a[1] * b[1]) / norm2
        ci = (a[0] * b[1] - a[1] * b[0]) / norm2
        d = sheet_pts - sheet_pts[i]
        ex = image_pts[i, 0] + cr * d[:, 0] - ci * d[:, 1] - image_pts[:, 0]
        ey = image_pts[i, 1] + ci * d[:, 0] + cr * d[:, 1] - image_pts[:, 1]
        consistent = ex * ex + ey * ey < gate2
        count = int(consistent.sum())
        if count > best_count:
            best_count, best = count, consistent
    if best is None:
        return np.ones(m, dtype=bool)
    return best


@dataclass(frozen=True)
class Detection:
    marker_id: str
    homography: Homography  # image <- marker sheet mm
    inlier_count: int
    inlier_ratio: float
    votes: int
    sheet_points: np.ndarray  # (M, 2) matched marker dots
    image_points: np.ndarray  # (M, 2) observed pixels
    inlier_mask: np.ndarray  # (M,) bool


def detect(
    frame: ObservedFrame,
    table: DescriptorTable,
    intrinsics: CameraIntrinsics | None = None,
) -> list[Detection]:
    """Identify every registered marker visible in the frame."""
    params = table.params
    pts = np.asarray(frame.points, dtype=float)
    if len(pts) <= max(params.n_neighbors, 8):
        return []
    probes = query_keys(pts, params).reshape(len(pts), -1)
    keys_sorted, marker_no, dot_no, marker_ids = table.flat_index()

    lo = np.searchsorted(keys_sorted, probes.ravel(), side="left")
    hi = np.searchsorted(keys_sorted, probes.ravel(), side="right")
    sizes = hi - lo
    hit = sizes > 0
    if not hit.any():
        return []
    reps = sizes[hit]
    ends = np.cumsum(reps)
    entry = np.repeat(lo[hit], reps) + np.arange(ends[-1]) - np.repeat(
        ends - reps, reps
    )
    obs_of_probe = np.repeat(np.arange(len(pts)), probes.shape[1])
    obs = np.repeat(obs_of_probe[hit], reps)
    mk = marker_no[entry]
    dot = dot_no[entry]

    detections = []
    for marker_index in np.flatnonzero(np.bincount(mk, minlength=len(marker_ids))):
        rows = mk == marker_index
        votes = int(rows.sum())
        if votes < params.vote_threshold:
            continue
        pair_id = obs[rows] * np.int64(2**32) + dot[rows]
        uniq, counts = np.unique(pair_id, return_counts=True)
        cand_obs = (uniq >> 32).astype(np.int64)
        cand_dot = (uniq & 0xFFFFFFFF).astype(np.int64)
        keep = _similarity_filter(
            table.dots[marker_ids[marker_index]][cand_dot],
            pts[cand_obs],
            seed=_RANSAC_SEED,
        )
        uniq, counts = uniq[keep], counts[keep]
        # One dot per observed point and one point per dot, best votes first.
        order = np.lexsort((uniq, -counts))
        used_obs: set[int] = set()
        used_dot: set[int] = set()
        matches = []
        for pid in uniq[order]:
            obs_index = int(pid >> 32)
            dot_index = int(pid & 0xFFFFFFFF)
            if obs_index in used_obs or dot_index in used_dot:
                continue
            used_obs.add(obs_index)
            used_dot.add(dot_index)
            matches.append((obs_index, dot_index))
        if len(matches) < 4:
            continue
        obs_idx = np.array([m[0] for m in matches])
        dot_idx = np.array([m[1] for m in matches])
        sheet_pts = table.dots[marker_ids[marker_index]][dot_idx]
        image_pts = pts[obs_idx]
        try:
            homography, mask = estimate_homography_ransac(
                sheet_pts, image_pts, seed=_RANSAC_SEED
            )
        except NoConsensus:
            continue
        inliers = int(mask.sum())
        ratio = inliers / len(matches)
        if inliers >= 4 and ratio >= params.min_inlier_ratio:
            detections.append(
                Detection(
                    marker_id=marker_ids[marker_index],
                    homography=homography,
                    inlier_count=inliers,
                    inlier_ratio=ratio,
                    votes=votes,
                    sheet_points=sheet_pts,
                    image_points=image_pts,
                    inlier_mask=mask,
                )
            )
    detections.sort(key=lambda d: -d.inlier_count)
    return detections
