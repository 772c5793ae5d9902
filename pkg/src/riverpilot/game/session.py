"""Session state machine: attempt lifecycle, timers, stage transitions.

A session owns one team's run through the five levels of its stream.
All mutation goes through the operations below; each appends domain
events to ``session.events`` for the service layer to drain, so identical
call sequences produce identical state and identical event streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from riverpilot import canvas as canvas_mod
from riverpilot.game.level import Level, Stage, Stream, gamification_enabled
from riverpilot.game.physics import (
    CRASH,
    GOLD,
    PHYS_DT,
    TIMEOUT,
    AttemptPlan,
    plan_attempt,
)
from riverpilot.geometry import Vec2, canonical_angle

TRAJ_SAMPLE_EVERY = 10  # steps between trajectory samples / Stepped events


class NotDocked(RuntimeError):
    pass


class NotSailing(RuntimeError):
    pass


class NotCrashed(RuntimeError):
    pass


class HeadingUnset(RuntimeError):
    pass


class SessionComplete(RuntimeError):
    pass


class Phase:
    DOCKED = "docked"
    SAILING = "sailing"
    CRASHED = "crashed"
    REACHED_GOLD = "reached_gold"
    TIMED_OUT = "timed_out"


class Outcome:
    GOLD = "gold"
    CRASH = "crash"
    TIMEOUT = "timeout"
    RESET = "reset"


@dataclass
class AttemptRecord:
    level_letter: str
    index: int  # 1-based within the level
    heading: float
    started_ms: float
    ended_ms: float | None = None
    outcome: str | None = None
    trajectory: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "level": self.level_letter,
            "index": self.index,
            "heading": self.heading,
            "started_ms": self.started_ms,
            "ended_ms": self.ended_ms,
            "outcome": self.outcome,
            "trajectory": self.trajectory,
        }


@dataclass
class SessionState:
    team_id: str
    stream: Stream
    levels: list[Level]  # the five stream levels, play order
    level_index: int = 0
    ship_pos: Vec2 = Vec2(0.0, 0.0)
    heading: float | None = None
    phase: str = Phase.DOCKED
    session_clock_ms: float = 0.0
    level_clock_ms: float = 0.0
    attempts: list[AttemptRecord] = field(default_factory=list)
    heading_fresh: bool = False
    completed: bool = False
    canvas: canvas_mod.CanvasState | None = None
    events: list[dict] = field(default_factory=list)
    _plan: AttemptPlan | None = None
    _steps_done: int = 0
    _accum_ms: float = 0.0

    @property
    def level(self) -> Level:
        return self.levels[min(self.level_index, len(self.levels) - 1)]

    @property
    def stage(self) -> Stage:
        return self.level.stage

    def emit(self, kind: str, **payload) -> None:
        self.events.append({"type": kind, "ts": self.session_clock_ms, **payload})

    def drain_events(self) -> list[dict]:
        out = self.events
        if self.canvas is not None and self.canvas.events:
            for ev in self.canvas.events:
                out.append({"ts": self.session_clock_ms, **ev})
            self.canvas.events = []
        self.events = []
        return out

    def to_snapshot(self) -> dict:
        return {
            "team_id": self.team_id,
            "stream": self.stream.value,
            "level_index": self.level_index,
            "level": self.level.letter,
            "stage": self.stage.value,
            "gamification": gamification_enabled(self.stage),
            "phase": self.phase,
            "ship_pos": [self.ship_pos.x, self.ship_pos.y],
            "heading": self.heading,
            "session_clock_ms": self.session_clock_ms,
            "level_clock_ms": self.level_clock_ms,
            "time_limit_s": self.level.time_limit_s,
            "completed": self.completed,
            "attempts": [a.to_dict() for a in self.attempts],
            "canvas": self.canvas.to_dict() if self.canvas is not None else None,
        }


def _enter_level(session: SessionState, prev_stage: Stage | None) -> None:
    level = session.level
    session.ship_pos = level.dock
    session.phase = Phase.DOCKED
    session.heading_fresh = False
    session._plan = None
    session._steps_done = 0
    if prev_stage is not level.stage:
        session.emit("StageEntered", stage=level.stage.value, level=level.letter)
    if level.stage is Stage.ICONIC:
        session.canvas = canvas_mod.new_canvas(
            ship_velocity=Vec2(level.ship_speed, 0.0),
            current=level.current,
            wind=level.wind,
        )
    else:
        session.canvas = None


def new_session(team_id: str, levels: list[Level], stream: Stream) -> SessionState:
    from riverpilot.game.level import stream_levels

    session = SessionState(team_id=team_id, stream=stream, levels=stream_levels(levels, stream))
    _enter_level(session, prev_stage=None)
    return session


def set_velocity(session: SessionState, heading: float) -> SessionState:
    """Record the team's chosen direction; only valid while docked."""
    if session.completed or session.phase != Phase.DOCKED:
        raise NotDocked(f"cannot set velocity in phase {session.phase}")
    session.heading = canonical_angle(float(heading))
    session.heading_fresh = True
    session.emit("VelocitySet", heading=session.heading, level=session.level.letter)
    if session.canvas is not None:
        canvas_mod.set_ship_direction(session.canvas, session.heading, session.level.ship_speed)
    return session


def launch(session: SessionState) -> SessionState:
    """Open a new attempt from the dock with the freshly set heading."""
    if session.completed or session.phase != Phase.DOCKED:
        raise NotDocked(f"cannot launch in phase {session.phase}")
    if not session.heading_fresh or session.heading is None:
        raise HeadingUnset("set a direction before launching this attempt")
    level = session.level
    index = sum(1 for a in session.attempts if a.level_letter == level.letter) + 1
    record = AttemptRecord(
        level_letter=level.letter,
        index=index,
        heading=session.heading,
        started_ms=session.session_clock_ms,
        trajectory=[[session.ship_pos.x, session.ship_pos.y]],
    )
    session.attempts.append(record)
    session._plan = plan_attempt(
        level, session.ship_pos, session.heading, session.level_clock_ms
    )
    session._steps_done = 0
    session.phase = Phase.SAILING
    session.heading_fresh = False
    session.emit("Launched", level=level.letter, attempt=index, heading=session.heading)
    return session


def _close_attempt(session: SessionState, outcome: str) -> None:
    record = session.attempts[-1]
    record.ended_ms = session.session_clock_ms
    record.outcome = outcome
    pos = [session.ship_pos.x, session.ship_pos.y]
    if record.trajectory[-1] != pos:
        record.trajectory.append(pos)
    session.emit(
        "Outcome",
        level=record.level_letter,
        attempt=record.index,
        outcome=outcome,
        pos=pos,
    )
    if outcome in (Outcome.GOLD, Outcome.CRASH) and gamification_enabled(session.stage):
        session.emit("SoundCue", cue="win" if outcome == Outcome.GOLD else "crash")


def _advance_level(session: SessionState, last_outcome: str, clock_carry_ms: float = 0.0) -> None:
    prev_stage = session.stage
    session.level_index += 1
    session.level_clock_ms = clock_carry_ms
    if session.level_index >= len(session.levels):
        session.level_index = len(session.levels) - 1
        session.completed = True
        session.phase = (
            Phase.REACHED_GOLD if last_outcome == Outcome.GOLD else Phase.TIMED_OUT
        )
        session._plan = None
        session.emit("SessionCompleted", outcome=last_outcome)
        return
    _enter_level(session, prev_stage)


def step(session: SessionState, dt: float = PHYS_DT) -> SessionState:
    """One Euler step of the open attempt; resolves outcomes in order."""
    if session.phase != Phase.SAILING:
        raise NotSailing(f"cannot step in phase {session.phase}")
    plan = session._plan
    if plan is None or plan.dt != dt:
        # Re-anchor at the current position so a dt change stays Euler-exact.
        plan = plan_attempt(
            session.level, session.ship_pos, session.attempts[-1].heading,
            session.level_clock_ms, dt,
        )
        session._plan = plan
        session._steps_done = 0

    session._steps_done += 1
    dt_ms = dt * 1000.0
    session.session_clock_ms += dt_ms
    session.level_clock_ms += dt_ms
    session.ship_pos = plan.position_after(session._steps_done)

    record = session.attempts[-1]
    if session._steps_done % TRAJ_SAMPLE_EVERY == 0:
        pos = [session.ship_pos.x, session.ship_pos.y]
        record.trajectory.append(pos)
        session.emit("Stepped", level=record.level_letter, attempt=record.index, pos=pos)

    if session._steps_done >= plan.total_steps:
        if plan.outcome == GOLD:
            _close_attempt(session, Outcome.GOLD)
            _advance_level(session, Outcome.GOLD)
        elif plan.outcome == CRASH:
            _close_attempt(session, Outcome.CRASH)
            session.phase = Phase.CRASHED
            session._plan = None
        elif plan.outcome == TIMEOUT:
            _close_attempt(session, Outcome.TIMEOUT)
            overshoot = session.level_clock_ms - session.level.time_limit_s * 1000.0
            _advance_level(session, Outcome.TIMEOUT, clock_carry_ms=max(0.0, overshoot))
    return session


def reset(session: SessionState) -> SessionState:
    """Return a crashed ship to the dock; the level clock keeps running."""
    if session.phase != Phase.CRASHED:
        raise NotCrashed(f"cannot reset in phase {session.phase}")
    record = session.attempts[-1]
    if record.outcome is None:  # defensive: step() closes on crash
        _close_attempt(session, Outcome.CRASH)
    session.ship_pos = session.level.dock
    session.phase = Phase.DOCKED
    session.heading_fresh = False
    session._plan = None
    session.emit("ResetToDock", level=session.level.letter)
    return session


def abort_open_attempt(session: SessionState) -> SessionState:
    """Administratively close a mid-flight attempt (session shutdown)."""
    if session.phase == Phase.SAILING and session.attempts and session.attempts[-1].outcome is None:
        _close_attempt(session, Outcome.RESET)
        session.phase = Phase.DOCKED
        session.ship_pos = session.level.dock
        session._plan = None
    return session


def tick(session: SessionState, ms: float) -> SessionState:
    """Advance the session clock; drives physics and docked timeouts."""
    if ms < 0:
        raise ValueError("tick must advance time")
    remaining = float(ms)
    while remaining > 0.0 or session._accum_ms > 0.0:
        if session.completed:
            session.session_clock_ms += remaining
            session._accum_ms = 0.0
            return session
        if session.phase == Phase.SAILING:
            plan = session._plan
            dt_ms = (plan.dt if plan is not None else PHYS_DT) * 1000.0
            session._accum_ms += remaining
            remaining = 0.0
            while session._accum_ms >= dt_ms and session.phase == Phase.SAILING:
                session._accum_ms -= dt_ms
                step(session, dt_ms / 1000.0)
            if session.phase != Phase.SAILING:
                # Attempt closed mid-tick; leftover time flows to the dock.
                remaining = session._accum_ms
                session._accum_ms = 0.0
                continue
            return session
        # Docked or crashed: wall time accrues directly on the clocks.
        session.session_clock_ms += remaining
        session.level_clock_ms += remaining
        remaining = 0.0
        limit_ms = session.level.time_limit_s * 1000.0
        while session.level_clock_ms > limit_ms and not session.completed:
            carry = session.level_clock_ms - limit_ms
            session.emit("Outcome", level=session.level.letter, attempt=None, outcome=Outcome.TIMEOUT)
            _advance_level(session, Outcome.TIMEOUT, clock_carry_ms=carry)
            limit_ms = session.level.time_limit_s * 1000.0
    return session
