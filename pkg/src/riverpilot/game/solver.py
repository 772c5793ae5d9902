"""Correct-direction solver and level complexity.

The correct direction for a level is the launch heading that actually
reaches the gold in the stepped game, chosen as close as possible to the
naive dock-to-gold bearing: a coarse 3600-heading sweep classifies the
disc of headings, bisection sharpens the edge of the winning arc nearest
the naive bearing down to 0.01 degrees, and the result is verified against
the discrete attempt plan (nudging into the arc interior if the continuous
edge grazes).
"""

from __future__ import annotations

import math

import numpy as np

from riverpilot.game.level import Level
from riverpilot.game.physics import GOLD, PHYS_DT, plan_attempt
from riverpilot.geometry import angular_distance, canonical_angle, point_in_polygon

GRID = 3600
TOL_RAD = math.radians(0.01)


class Unsolvable(ValueError):
    """No heading reaches the gold on this level."""


_solve_cache: dict[tuple, float] = {}


def naive_bearing(level: Level) -> float:
    """Straight dock-to-gold direction, ignoring wind and current."""
    return (level.gold_center - level.dock).bearing()


def _classify(level: Level, headings: np.ndarray) -> np.ndarray:
    """Continuous-geometry Gold mask for an array of launch headings."""
    start = np.array([level.dock.x, level.dock.y])
    drift = np.array([level.wind.x, level.wind.y], dtype=float)
    if point_in_polygon(level.dock, level.river):
        drift = drift + np.array([level.current.x, level.current.y])
    v = np.column_stack(
        (
            level.ship_speed * np.cos(headings) + drift[0],
            level.ship_speed * np.sin(headings) + drift[1],
        )
    )
    span = level.time_limit_s + PHYS_DT  # generous; exact cutoff is discrete

    # First entry time into the gold disc: |start + t v - c|^2 = r^2.
    f = start - np.array([level.gold_center.x, level.gold_center.y])
    a = np.einsum("ij,ij->i", v, v)
    b = 2.0 * (v @ f)
    c = float(f @ f) - level.gold_radius**2
    disc = b * b - 4.0 * a * c
    with np.errstate(divide="ignore", invalid="ignore"):
        t_gold = np.where(disc >= 0.0, (-b - np.sqrt(np.maximum(disc, 0.0))) / (2.0 * a), np.inf)
    t_gold = np.where((a > 0.0) & (t_gold >= 0.0), t_gold, np.inf)
    if c <= 0.0:  # launching from inside the disc
        t_gold = np.zeros_like(t_gold)

    # First bank crossing: ray against each polygon edge.
    poly = level.river
    edge_a = poly
    edge_b = np.roll(poly, -1, axis=0)
    e = edge_b - edge_a  # (E, 2)
    ap = edge_a - start  # (E, 2)
    num_t = ap[:, 0] * e[:, 1] - ap[:, 1] * e[:, 0]  # (E,)
    denom = v[:, 0][:, None] * e[:, 1][None, :] - v[:, 1][:, None] * e[:, 0][None, :]
    s_num = ap[:, 0][None, :] * v[:, 1][:, None] - ap[:, 1][None, :] * v[:, 0][:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = num_t[None, :] / denom
        s = s_num / denom
    valid = (np.abs(denom) > 1e-12) & (t >= 0.0) & (s >= 0.0) & (s <= 1.0)
    t = np.where(valid, t, np.inf)
    t_crash = t.min(axis=1)

    return (t_gold <= t_crash) & (t_gold <= span)


def _gold_single(level: Level, heading: float) -> bool:
    return bool(_classify(level, np.array([heading]))[0])


def solve_correct_direction(level: Level) -> float:
    """Gold-reaching heading closest to the naive bearing, to 0.01 degrees."""
    key = level.fingerprint()
    if key in _solve_cache:
        return _solve_cache[key]

    naive = naive_bearing(level)
    offsets = (np.arange(GRID) - GRID // 2) * (2.0 * math.pi / GRID)
    mask = _classify(level, naive + offsets)
    if not mask.any():
        raise Unsolvable(f"level {level.letter}: no heading reaches the gold")

    penalty = np.where(mask, 0.0, 1e9)
    idx = int(np.argmin(np.abs(offsets) + penalty))
    delta = float(offsets[idx])

    if delta != 0.0:
        # Bisect between the nearest non-gold grid neighbor (toward the
        # naive bearing) and the gold point, keeping the gold side.
        step = 2.0 * math.pi / GRID
        lo = delta - math.copysign(step, delta)
        hi = delta
        while abs(hi - lo) > TOL_RAD:
            mid = 0.5 * (hi + lo)
            if _gold_single(level, naive + mid):
                hi = mid
            else:
                lo = mid
        delta = hi

    # The continuous edge can graze; confirm against the stepped game and
    # walk into the arc interior if needed.
    into_arc = math.copysign(1.0, delta) if delta != 0.0 else 1.0
    nudge = math.radians(0.002)
    for i in range(26):
        for sign in ((into_arc,) if delta != 0.0 else (1.0, -1.0)):
            cand = canonical_angle(naive + delta + sign * i * nudge)
            if plan_attempt(level, level.dock, cand).outcome == GOLD:
                _solve_cache[key] = cand
                return cand
    # Fall back to grid gold headings by distance from naive.
    order = np.argsort(np.abs(offsets) + penalty)
    for j in order:
        if not mask[j]:
            break
        cand = canonical_angle(naive + float(offsets[j]))
        if plan_attempt(level, level.dock, cand).outcome == GOLD:
            _solve_cache[key] = cand
            return cand
    raise Unsolvable(f"level {level.letter}: no verified heading reaches the gold")


def level_complexity(level: Level) -> float:
    """Angular distance between the correct and the naive direction."""
    return angular_distance(solve_correct_direction(level), naive_bearing(level))
