"""Planar and projective geometry primitives shared by all modules.

Coordinate conventions
----------------------
Sheet frame: origin at the top-left corner of a paper sheet, x to the
right, y downward, units are millimeters.  Angles are measured with
``atan2(y, x)``, so a heading of 0 points along +x (east on the sheet)
and +pi/2 points along +y (south).

Camera frame: x right, y down, z forward (into the scene).  A pose maps
sheet coordinates into the camera frame via ``Xc = R @ [x, y, 0] + t``.

Image frame: pixels, origin at the top-left, u right, v down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU = 2.0 * math.pi


class PointAtInfinity(ValueError):
    """Projective mapping produced a vanishing homogeneous w-component."""


class DegenerateHomography(ValueError):
    """Homography too ill-conditioned to decompose into a pose."""


@dataclass(frozen=True)
class Vec2:
    """A point or displacement on a sheet, in millimeters."""

    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> float:
        return self.x * other.y - self.y * other.x

    def magnitude(self) -> float:
        return math.hypot(self.x, self.y)

    def bearing(self) -> float:
        """Direction of this vector as a canonical angle in radians."""
        return math.atan2(self.y, self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @staticmethod
    def from_array(a) -> "Vec2":
        return Vec2(float(a[0]), float(a[1]))


def canonical_angle(theta: float) -> float:
    """Reduce an angle to the canonical range (-pi, pi]."""
    r = math.remainder(theta, TAU)
    if r <= -math.pi:
        r += TAU
    return r


def angular_distance(a: float, b: float) -> float:
    """Shortest angular separation between two angles, in [0, pi].

    Symmetric and wraparound-correct: angles equal modulo 2*pi have
    distance zero.
    """
    return abs(canonical_angle(a - b))


def heading_vector(theta: float) -> Vec2:
    return Vec2(math.cos(theta), math.sin(theta))


def _normalize_h(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"homography must be 3x3, got {m.shape}")
    n = np.linalg.norm(m)
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("homography has zero or non-finite norm")
    m = m / n
    # Sign convention: h33 positive when meaningfully nonzero, otherwise
    # fall back to the largest-magnitude entry so normalize(sH) is stable
    # for every s != 0.
    if abs(m[2, 2]) > 1e-12:
        ref = m[2, 2]
    else:
        flat = m.ravel()
        ref = flat[int(np.argmax(np.abs(flat)))]
    if ref < 0:
        m = -m
    return m


@dataclass(frozen=True)
class Homography:
    """3x3 projective map, stored with unit Frobenius norm and fixed sign."""

    m: np.ndarray

    def __init__(self, m) -> None:
        object.__setattr__(self, "m", _normalize_h(m))

    @staticmethod
    def identity() -> "Homography":
        return Homography(np.eye(3))

    def apply(self, p: Vec2) -> Vec2:
        q = self.m @ np.array([p.x, p.y, 1.0])
        if abs(q[2]) < 1e-12:
            raise PointAtInfinity(f"point {p} maps to infinity")
        return Vec2(q[0] / q[2], q[1] / q[2])

    def apply_batch(self, pts: np.ndarray) -> np.ndarray:
        """Map an (N, 2) array of points; w-degenerate rows raise."""
        pts = np.asarray(pts, dtype=float)
        q = pts @ self.m[:, :2].T + self.m[:, 2]
        w = q[:, 2]
        if np.any(np.abs(w) < 1e-12):
            raise PointAtInfinity("batch contains a point mapping to infinity")
        return q[:, :2] / w[:, None]

    def condition_number(self) -> float:
        s = np.linalg.svd(self.m, compute_uv=False)
        if s[-1] == 0.0:
            return math.inf
        return float(s[0] / s[-1])


def homography_apply(h: Homography, p: Vec2) -> Vec2:
    return h.apply(p)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Central pinhole model: focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")

    @property
    def k(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    def k_inv(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )

    def project(self, points_cam: np.ndarray) -> np.ndarray:
        """Project (N, 3) camera-frame points to (N, 2) pixels."""
        p = np.asarray(points_cam, dtype=float)
        z = p[:, 2]
        return np.column_stack(
            (self.fx * p[:, 0] / z + self.cx, self.fy * p[:, 1] / z + self.cy)
        )


_ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class Pose3D:
    """Rigid pose of a camera relative to a sheet plane.

    ``rotation`` is a proper orthonormal 3x3 matrix, ``translation`` is in
    millimeters; together they map sheet points into the camera frame.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __init__(self, rotation, translation) -> None:
        r = np.asarray(rotation, dtype=float)
        t = np.asarray(translation, dtype=float).reshape(3)
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if np.max(np.abs(r.T @ r - np.eye(3))) > _ORTHO_TOL:
            raise ValueError("rotation is not orthonormal within tolerance")
        if abs(np.linalg.det(r) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation determinant must be +1")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    def transform(self, sheet_points: np.ndarray) -> np.ndarray:
        """Map (N, 2) sheet points (z = 0 plane) into camera coordinates."""
        p = np.asarray(sheet_points, dtype=float)
        xyz = np.column_stack((p, np.zeros(len(p))))
        return xyz @ self.rotation.T + self.translation


def nearest_rotation(m: np.ndarray) -> np.ndarray:
    """Project a 3x3 matrix onto SO(3) in the polar/SVD sense."""
    u, _, vt = np.linalg.svd(m)
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def forward_homography(pose: Pose3D, k: CameraIntrinsics) -> Homography:
    """Plane-induced homography (image <- sheet) for a known pose."""
    r = pose.rotation
    cols = np.column_stack((r[:, 0], r[:, 1], pose.translation))
    return Homography(k.k @ cols)


def pose_from_homography(h: Homography, k: CameraIntrinsics) -> Pose3D:
    """Recover the camera pose from a plane-induced homography.

    The two leading columns of K^-1 H give the in-plane rotation axes up
    to a common scale; the scale is fixed to the average of their norms,
    the third axis is their cross product, and the result is projected to
    the nearest orthonormal matrix.  The sign is chosen so the sheet lies
    in front of the camera (t_z > 0).
    """
    if h.condition_number() > 1e8:
        raise DegenerateHomography("condition number exceeds 1e8")
    hp = k.k_inv() @ h.m
    h1, h2, h3 = hp[:, 0], hp[:, 1], hp[:, 2]
    lam = 2.0 / (np.linalg.norm(h1) + np.linalg.norm(h2))
    if lam * h3[2] < 0:
        lam = -lam
    r1 = lam * h1
    r2 = lam * h2
    r3 = np.cross(r1, r2)
    rot = nearest_rotation(np.column_stack((r1, r2, r3)))
    return Pose3D(rot, lam * h3)


def point_in_polygon(p: Vec2, poly: np.ndarray) -> bool:
    """Even-odd ray cast; boundary points count by crossing parity."""
    x, y = p.x, p.y
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            x_at = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_at:
                inside = not inside
    return inside


def segment_polygon_crossings(p0: np.ndarray, p1: np.ndarray, poly: np.ndarray):
    """Parameters t in [0, 1] where segment p0->p1 crosses polygon edges.

    Returns a sorted array of crossing parameters (may be empty); edges
    parallel to the segment are skipped.
    """
    a = poly
    b = np.roll(poly, -1, axis=0)
    d = p1 - p0
    e = b - a
    ap = a - p0
    denom = d[0] * e[:, 1] - d[1] * e[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ap[:, 0] * e[:, 1] - ap[:, 1] * e[:, 0]) / denom
        s = (ap[:, 0] * d[1] - ap[:, 1] * d[0]) / denom
    valid = (np.abs(denom) > 1e-12) & (t >= 0.0) & (t <= 1.0) & (s >= 0.0) & (s <= 1.0)
    return np.sort(t[valid])


def segment_circle_entry(
    p0: np.ndarray, p1: np.ndarray, center: np.ndarray, radius: float
):
    """First parameter t in [0, 1] where segment p0->p1 reaches the disc.

    Returns 0.0 if p0 is already inside, None if the segment never
    touches the disc.
    """
    f = p0 - center
    if float(f @ f) <= radius * radius:
        return 0.0
    d = p1 - p0
    a = float(d @ d)
    if a == 0.0:
        return None
    b = 2.0 * float(f @ d)
    c = float(f @ f) - radius * radius
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    t = (-b - math.sqrt(disc)) / (2.0 * a)
    if 0.0 <= t <= 1.0:
        return t
    return None


def rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_zyx(r: np.ndarray) -> tuple[float, float, float]:
    """Decompose a rotation matrix into (yaw, pitch, roll), ZYX order."""
    pitch = math.asin(max(-1.0, min(1.0, -r[2, 0])))
    if abs(r[2, 0]) < 1.0 - 1e-12:
        yaw = math.atan2(r[1, 0], r[0, 0])
        roll = math.atan2(r[2, 1], r[2, 2])
    else:
        # Gimbal lock: yaw and roll are coupled; fold everything into yaw.
        yaw = math.atan2(-r[0, 1], r[1, 1])
        roll = 0.0
    return yaw, pitch, roll
