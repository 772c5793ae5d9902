"""Synthetic camera: project dot patterns into noisy, occluded frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from riverpilot.geometry import CameraIntrinsics, Pose3D
from riverpilot.markers.pattern import DotPattern

FRAME_WIDTH_PX = 1280
FRAME_HEIGHT_PX = 800


class SheetBehindCamera(ValueError):
    """The pose puts the sheet at or behind the camera plane."""


@dataclass(frozen=True)
class ObservedFrame:
    timestamp_ms: float
    points: np.ndarray  # (N, 2) image pixels


def render_points(
    points_mm: np.ndarray,
    pose: Pose3D,
    intrinsics: CameraIntrinsics,
    *,
    noise_sigma_px: float = 0.0,
    occlusion: float = 0.0,
    seed: int = 0,
    timestamp_ms: float = 0.0,
) -> ObservedFrame:
    """Project sheet points; drop a seeded fraction, jitter, cull to frame."""
    pts = np.asarray(points_mm, dtype=float)
    cam = pose.transform(pts)
    center = pose.transform(pts.mean(axis=0, keepdims=True))
    if center[0, 2] <= 1e-9:
        raise SheetBehindCamera(f"sheet center at z={center[0, 2]:.3f} mm")
    in_front = cam[:, 2] > 1e-6
    pixels = intrinsics.project(cam[in_front])
    rng = np.random.default_rng(seed)
    if occlusion > 0.0:
        keep = int(round((1.0 - occlusion) * len(pixels)))
        chosen = np.sort(rng.choice(len(pixels), size=keep, replace=False))
        pixels = pixels[chosen]
    if noise_sigma_px > 0.0:
        pixels = pixels + rng.normal(0.0, noise_sigma_px, size=pixels.shape)
    inside = (
        (pixels[:, 0] >= 0.0)
        & (pixels[:, 0] < FRAME_WIDTH_PX)
        & (pixels[:, 1] >= 0.0)
        & (pixels[:, 1] < FRAME_HEIGHT_PX)
    )
    return ObservedFrame(timestamp_ms=timestamp_ms, points=pixels[inside])


def render_view(
    pattern: DotPattern,
    pose: Pose3D,
    intrinsics: CameraIntrinsics,
    *,
    noise_sigma_px: float = 0.0,
    occlusion: float = 0.0,
    seed: int = 0,
    timestamp_ms: float = 0.0,
) -> ObservedFrame:
    return render_points(
        pattern.dots,
        pose,
        intrinsics,
        noise_sigma_px=noise_sigma_px,
        occlusion=occlusion,
        seed=seed,
        timestamp_ms=timestamp_ms,
    )
