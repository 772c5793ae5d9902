"""Level definitions, the bundled map loader, and invariant checks.

A level is one river crossing: the ship starts docked in the water near
one bank and must reach a gold zone on the opposite shore.  The current
acts only inside the river polygon; wind acts everywhere.  Letters A-J
alternate between the two play streams and determine the fading stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from importlib import resources

import numpy as np

from riverpilot.geometry import Vec2, point_in_polygon

TIME_LIMIT_S = 480
LETTERS = "ABCDEFGHIJ"
STREAM1_LETTERS = ("A", "C", "E", "G", "I")
STREAM2_LETTERS = ("B", "D", "F", "H", "J")


class ParseError(ValueError):
    """Level file is not syntactically valid."""


class InvariantViolation(ValueError):
    """Level file parses but violates a domain invariant."""

    def __init__(self, path: str, message: str) -> None:
        self.field_path = path
        super().__init__(f"{path}: {message}")


class Stream(Enum):
    STREAM1 = 1
    STREAM2 = 2


class Stage(Enum):
    ENACTIVE = "enactive"
    ENACTIVE_ICONIC = "enactive_iconic"
    ICONIC = "iconic"


def stage_for_letter(letter: str) -> Stage:
    if letter in "ABCD":
        return Stage.ENACTIVE
    if letter in "EFGH":
        return Stage.ENACTIVE_ICONIC
    if letter in "IJ":
        return Stage.ICONIC
    raise ValueError(f"unknown level letter {letter!r}")


def stream_for_letter(letter: str) -> Stream:
    if letter in STREAM1_LETTERS:
        return Stream.STREAM1
    if letter in STREAM2_LETTERS:
        return Stream.STREAM2
    raise ValueError(f"unknown level letter {letter!r}")


def gamification_enabled(stage: Stage) -> bool:
    # The final fading stage strips points, sounds, and treasure imagery.
    return stage is not Stage.ICONIC


@dataclass(frozen=True)
class Level:
    letter: str
    stream: Stream
    dock: Vec2
    gold_center: Vec2
    gold_radius: float
    river: np.ndarray  # closed polygon ring, (N, 2) mm
    current: Vec2  # mm/s inside the river polygon
    wind: Vec2  # mm/s everywhere
    ship_speed: float  # mm/s, fixed magnitude; the player sets direction only
    stage: Stage
    time_limit_s: int = TIME_LIMIT_S

    def fingerprint(self) -> tuple:
        return (
            self.letter,
            self.dock.x,
            self.dock.y,
            self.gold_center.x,
            self.gold_center.y,
            self.gold_radius,
            self.river.tobytes(),
            self.current.x,
            self.current.y,
            self.wind.x,
            self.wind.y,
            self.ship_speed,
        )


def _vec(path: str, raw) -> Vec2:
    if not (isinstance(raw, (list, tuple)) and len(raw) == 2):
        raise InvariantViolation(path, f"expected [x, y], got {raw!r}")
    return Vec2(float(raw[0]), float(raw[1]))


def _parse_level(idx: int, raw: dict) -> Level:
    path = f"levels[{idx}]"
    try:
        letter = raw["letter"]
        dock = _vec(f"{path}.dock", raw["dock"])
        gold_center = _vec(f"{path}.gold.center", raw["gold"]["center"])
        gold_radius = float(raw["gold"]["radius"])
        river = np.asarray(raw["river"], dtype=float)
        current = _vec(f"{path}.current", raw["current"])
        wind = _vec(f"{path}.wind", raw["wind"])
        ship_speed = float(raw["ship_speed"])
        time_limit = int(raw["time_limit"])
        stream_raw = int(raw["stream"])
        stage_raw = str(raw["stage"])
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvariantViolation):
            raise
        raise ParseError(f"{path}: missing or malformed field ({exc})") from exc

    if letter not in LETTERS:
        raise InvariantViolation(f"{path}.letter", f"must be one of A..J, got {letter!r}")
    if time_limit != TIME_LIMIT_S:
        raise InvariantViolation(
            f"{path}.time_limit", f"must be {TIME_LIMIT_S}, got {time_limit}"
        )
    if stream_raw != stream_for_letter(letter).value:
        raise InvariantViolation(
            f"{path}.stream", f"letter {letter} belongs to stream {stream_for_letter(letter).value}"
        )
    expected_stage = stage_for_letter(letter)
    if stage_raw != expected_stage.value:
        raise InvariantViolation(
            f"{path}.stage", f"letter {letter} requires stage {expected_stage.value!r}"
        )
    if river.ndim != 2 or river.shape[1] != 2 or len(river) < 3:
        raise InvariantViolation(f"{path}.river", "polygon needs at least 3 [x, y] points")
    if ship_speed <= 0:
        raise InvariantViolation(f"{path}.ship_speed", "must be positive")
    if gold_radius <= 0:
        raise InvariantViolation(f"{path}.gold.radius", "must be positive")
    if not point_in_polygon(dock, river):
        raise InvariantViolation(f"{path}.dock", "dock must lie inside the river polygon")
    if point_in_polygon(gold_center, river):
        raise InvariantViolation(
            f"{path}.gold.center", "gold must lie on the shore, outside the river polygon"
        )
    return Level(
        letter=letter,
        stream=Stream(stream_raw),
        dock=dock,
        gold_center=gold_center,
        gold_radius=gold_radius,
        river=river,
        current=current,
        wind=wind,
        ship_speed=ship_speed,
        stage=expected_stage,
        time_limit_s=time_limit,
    )


def load_levels(path) -> list[Level]:
    """Load and validate a 10-level map file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read map file {path}: {exc}") from exc
    if not isinstance(raw, dict) or "levels" not in raw:
        raise ParseError("map file must be an object with a 'levels' array")
    levels = [_parse_level(i, entry) for i, entry in enumerate(raw["levels"])]
    letters = [lv.letter for lv in levels]
    if sorted(letters) != list(LETTERS):
        raise InvariantViolation(
            "levels", f"need letters A..J exactly once, got {''.join(sorted(letters))}"
        )
    levels.sort(key=lambda lv: lv.letter)
    return levels


def stream_levels(levels: list[Level], stream: Stream) -> list[Level]:
    """The five levels of one stream, in play order."""
    order = STREAM1_LETTERS if stream is Stream.STREAM1 else STREAM2_LETTERS
    by_letter = {lv.letter: lv for lv in levels}
    return [by_letter[c] for c in order]


def default_map_path() -> str:
    return str(resources.files("riverpilot").joinpath("maps/default.json"))
