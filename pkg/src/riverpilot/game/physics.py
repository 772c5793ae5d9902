"""Ship kinematics: fixed-step Euler integration with swept-segment events.

Positions during an attempt are anchored: the ship's location after k
steps is computed as ``anchor + (k * dt) * velocity`` rather than by
accumulating additions, so a step-by-step walk and a closed-form rollout
of the same attempt agree bit for bit.  Outcome detection is swept: each
step's segment is tested for gold-disc entry and bank crossings, which
rules out tunneling through thin features at any speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from riverpilot.game.level import Level
from riverpilot.geometry import (
    Vec2,
    point_in_polygon,
    segment_circle_entry,
    segment_polygon_crossings,
)

PHYS_DT = 0.01  # seconds per Euler step
GOLD = "gold"
CRASH = "crash"
TIMEOUT = "timeout"


def total_velocity(level: Level, heading: float, pos: Vec2) -> Vec2:
    """Ship velocity plus wind, plus current when inside the river."""
    vx = level.ship_speed * math.cos(heading) + level.wind.x
    vy = level.ship_speed * math.sin(heading) + level.wind.y
    if point_in_polygon(pos, level.river):
        vx += level.current.x
        vy += level.current.y
    return Vec2(vx, vy)


@dataclass(frozen=True)
class AttemptPlan:
    """Precomputed fate of one launch under fixed heading and fields.

    The outcome fires during step ``end_step`` (0-based); steps before it
    move the ship the full ``dt * velocity``, and the final step stops at
    ``end_pos`` (disc entry point, bank crossing point, or the plain Euler
    endpoint for a timeout).
    """

    outcome: str
    end_step: int
    end_pos: Vec2
    anchor: Vec2
    velocity: Vec2
    dt: float

    def position_after(self, k: int) -> Vec2:
        """Ship position after k completed steps (k <= end_step + 1)."""
        if k > self.end_step:
            return self.end_pos
        t = k * self.dt
        return Vec2(self.anchor.x + t * self.velocity.x, self.anchor.y + t * self.velocity.y)

    @property
    def total_steps(self) -> int:
        return self.end_step + 1


def _segment_event(
    level: Level, p0: np.ndarray, p1: np.ndarray
) -> tuple[float, str, np.ndarray] | None:
    """Earliest outcome on one Euler segment: (tau, kind, position)."""
    gc = np.array([level.gold_center.x, level.gold_center.y])
    tau_gold = segment_circle_entry(p0, p1, gc, level.gold_radius)
    crossings = segment_polygon_crossings(p0, p1, level.river)
    tau_crash = float(crossings[0]) if len(crossings) else None
    # A bank crossing inside the gold zone is not a crash; disc entry is
    # always at or before any such crossing, so ordering decides (ties go
    # to gold).
    if tau_gold is not None and (tau_crash is None or tau_gold <= tau_crash):
        return tau_gold, GOLD, p0 + tau_gold * (p1 - p0)
    if tau_crash is not None:
        return tau_crash, CRASH, p0 + tau_crash * (p1 - p0)
    return None


def _steps_until_timeout(level: Level, level_clock_ms: float, dt: float) -> int:
    # Number of steps that will execute before the timeout fires: the
    # clock check runs after each update, so the step whose completion
    # first pushes the clock strictly past the limit still executes.
    dt_ms = dt * 1000.0
    limit_ms = level.time_limit_s * 1000
    remaining = limit_ms - level_clock_ms
    if remaining < 0:
        return 0
    return int(math.floor(remaining / dt_ms + 1e-9)) + 1


def plan_attempt(
    level: Level,
    start: Vec2,
    heading: float,
    level_clock_ms: float = 0.0,
    dt: float = PHYS_DT,
) -> AttemptPlan:
    """Roll an attempt forward to its outcome without walking every step.

    Continuous ray geometry nominates the step where each event can fire;
    the nominated step and its neighbors are then re-tested with the same
    discrete segment predicate a stepwise walk uses, so the plan is
    exactly what repeated stepping would produce.
    """
    vel = total_velocity(level, heading, start)
    k_to = _steps_until_timeout(level, level_clock_ms, dt)
    p0 = np.array([start.x, start.y])
    vv = np.array([vel.x, vel.y])

    if k_to == 0:
        return AttemptPlan(TIMEOUT, -1, start, start, vel, dt)

    candidates: list[int] = []
    speed2 = float(vv @ vv)
    if speed2 > 0.0:
        span = k_to * dt
        p_end = p0 + span * vv
        gc = np.array([level.gold_center.x, level.gold_center.y])
        tau = segment_circle_entry(p0, p_end, gc, level.gold_radius)
        if tau is not None:
            candidates.append(int(tau * k_to))
        crossings = segment_polygon_crossings(p0, p_end, level.river)
        if len(crossings):
            candidates.append(int(float(crossings[0]) * k_to))

    best: tuple[int, float, str, np.ndarray] | None = None
    seen: set[int] = set()
    for kc in candidates:
        for k in (kc - 1, kc, kc + 1):
            if k < 0 or k >= k_to or k in seen:
                continue
            seen.add(k)
            a = p0 + (k * dt) * vv
            b = p0 + ((k + 1) * dt) * vv
            hit = _segment_event(level, a, b)
            if hit is None:
                continue
            tau, kind, pos = hit
            key = (k, tau, kind, pos)
            if best is None or (k, tau) < (best[0], best[1]):
                best = key

    if best is not None:
        k, _tau, kind, pos = best
        return AttemptPlan(kind, k, Vec2(float(pos[0]), float(pos[1])), start, vel, dt)

    end = p0 + (k_to * dt) * vv
    return AttemptPlan(TIMEOUT, k_to - 1, Vec2(float(end[0]), float(end[1])), start, vel, dt)
