"""Drawing-test and multiple-choice scoring.

Teams draw an answer arrow for each of ten vector sum/difference items;
an item's score weights direction error 10:1 over relative length error,
landing in [0,1].  The post-test mirrors the pre-test items horizontally.
A four-question multiple-choice block is scored as a weighted fraction,
direction questions counting double.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources

from riverpilot.geometry import Vec2, angular_distance

ANGLE_WEIGHT = 10.0
ITEM_COUNT = 10
MCQ_COUNT = 4


class ItemCountMismatch(ValueError):
    pass


class BankError(ValueError):
    """An item bank file violates its structural invariants."""


class Operation(Enum):
    SUM = "sum"
    DIFFERENCE = "difference"


@dataclass(frozen=True)
class Arrow:
    start: Vec2
    end: Vec2

    def delta(self) -> Vec2:
        return self.end - self.start


# An answer is just an arrow the team drew.
DrawnAnswer = Arrow


@dataclass(frozen=True)
class TestItem:
    __test__ = False  # not a pytest class, despite the name

    id: int
    operands: tuple[Arrow, ...]
    operation: Operation
    axes_visible: bool
    ticks_visible: bool
    answer_start_locked: bool
    ground_truth: Arrow


@dataclass(frozen=True)
class McqItem:
    id: int
    question: str
    options: tuple[str, ...]
    correct: int
    weight: float
    focus: str  # "direction" | "length"


def score_item(answer: DrawnAnswer | None, item: TestItem) -> float:
    """Blend of direction and clamped relative length error, 10:1."""
    if answer is None:
        return 0.0
    truth = item.ground_truth.delta()
    t_len = truth.magnitude()
    drawn = answer.delta()
    d_len = drawn.magnitude()
    if d_len == 0.0:
        d_theta = math.pi  # no direction at all: maximal direction error
    else:
        d_theta = angular_distance(drawn.bearing(), truth.bearing())
    e_len = min(1.0, abs(d_len - t_len) / t_len)
    return 1.0 - (ANGLE_WEIGHT * (d_theta / math.pi) + e_len) / (ANGLE_WEIGHT + 1.0)


def score_test(answers, items) -> float:
    """Sum of item scores over the ten-item bank; None answers score 0."""
    if len(items) != ITEM_COUNT or len(answers) != len(items):
        raise ItemCountMismatch(f"expected {ITEM_COUNT} answers and items")
    return sum(score_item(a, it) for a, it in zip(answers, items))


def _mirror_arrow(a: Arrow) -> Arrow:
    return Arrow(Vec2(-a.start.x, a.start.y), Vec2(-a.end.x, a.end.y))


def mirror_item(item: TestItem) -> TestItem:
    """Reflect operands and ground truth about the vertical axis."""
    return replace(
        item,
        operands=tuple(_mirror_arrow(op) for op in item.operands),
        ground_truth=_mirror_arrow(item.ground_truth),
    )


def mcq_score(responses, items) -> float:
    """Weighted fraction of correct options, in [0,1]."""
    if len(items) != MCQ_COUNT or len(responses) != len(items):
        raise ItemCountMismatch(f"expected {MCQ_COUNT} responses and items")
    total = sum(it.weight for it in items)
    earned = sum(it.weight for r, it in zip(responses, items) if r == it.correct)
    return earned / total


def learning_gain(pre: float, post: float) -> float:
    """Normalized gain (post - pre) / (10 - pre); defined as 0 at pre = 10."""
    if not (0.0 <= pre <= 10.0 and 0.0 <= post <= 10.0):
        raise ValueError(f"scores must lie in [0, 10], got pre={pre}, post={post}")
    if pre == 10.0:
        return 0.0
    return (post - pre) / (10.0 - pre)


def _arrow(path: str, raw: dict) -> Arrow:
    try:
        s, e = raw["start"], raw["end"]
        return Arrow(Vec2(float(s[0]), float(s[1])), Vec2(float(e[0]), float(e[1])))
    except (KeyError, TypeError, ValueError, IndexError):
        raise BankError(f"{path}: expected {{start: [x,y], end: [x,y]}}") from None


def _expected_delta(item: TestItem) -> Vec2:
    total = item.operands[0].delta()
    for op in item.operands[1:]:
        d = op.delta()
        if item.operation is Operation.DIFFERENCE:
            d = -1.0 * d
        total = total + d
    return total


def _check_item(idx: int, item: TestItem) -> None:
    path = f"items[{idx}]"
    if not 1 <= len(item.operands) <= 2:
        raise BankError(f"{path}: needs 1 or 2 operands")
    if item.operation is Operation.DIFFERENCE and len(item.operands) != 2:
        raise BankError(f"{path}: a difference needs exactly 2 operands")
    for j, op in enumerate(item.operands):
        if op.delta().magnitude() == 0.0:
            raise BankError(f"{path}.operands[{j}]: zero-length operand")
    if item.ground_truth.delta().magnitude() == 0.0:
        raise BankError(f"{path}.ground_truth: zero-length")
    want = _expected_delta(item)
    got = item.ground_truth.delta()
    if (got - want).magnitude() > 1e-9:
        raise BankError(
            f"{path}.ground_truth: delta {got} does not match the operands' {want}"
        )
    if item.id <= 4:
        if not (item.axes_visible and item.ticks_visible and item.answer_start_locked):
            raise BankError(f"{path}: early items keep axes, ticks and a locked start")
        for j, op in enumerate(item.operands):
            if op.start != Vec2(0.0, 0.0):
                raise BankError(f"{path}.operands[{j}]: early operands sit at the origin")


def load_items(path: str | None = None) -> list[TestItem]:
    if path is None:
        path = str(resources.files("riverpilot").joinpath("data/items.json"))
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "items" not in raw:
        raise BankError("item bank must be an object with an 'items' array")
    items = []
    for i, entry in enumerate(raw["items"]):
        p = f"items[{i}]"
        try:
            item = TestItem(
                id=int(entry["id"]),
                operands=tuple(
                    _arrow(f"{p}.operands[{j}]", op)
                    for j, op in enumerate(entry["operands"])
                ),
                operation=Operation(entry["operation"]),
                axes_visible=bool(entry["axes_visible"]),
                ticks_visible=bool(entry["ticks_visible"]),
                answer_start_locked=bool(entry["answer_start_locked"]),
                ground_truth=_arrow(f"{p}.ground_truth", entry["ground_truth"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, BankError):
                raise
            raise BankError(f"{p}: {exc}") from None
        _check_item(i, item)
        items.append(item)
    if [it.id for it in items] != list(range(1, ITEM_COUNT + 1)):
        raise BankError("item ids must be exactly 1..10 in order")
    for flag in ("axes_visible", "ticks_visible", "answer_start_locked"):
        seq = [getattr(it, flag) for it in items]
        if any(b and not a for a, b in zip(seq, seq[1:])):
            raise BankError(f"{flag} may only fade out, never reappear")
    return items


def load_mcq(path: str | None = None) -> list[McqItem]:
    if path is None:
        path = str(resources.files("riverpilot").joinpath("data/mcq.json"))
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "items" not in raw:
        raise BankError("mcq bank must be an object with an 'items' array")
    items = []
    for i, entry in enumerate(raw["items"]):
        p = f"items[{i}]"
        try:
            item = McqItem(
                id=int(entry["id"]),
                question=str(entry["question"]),
                options=tuple(str(o) for o in entry["options"]),
                correct=int(entry["correct"]),
                weight=float(entry["weight"]),
                focus=str(entry["focus"]),
            )
        except (KeyError, TypeError, ValueError):
            raise BankError(f"{p}: malformed entry") from None
        if item.focus not in ("direction", "length"):
            raise BankError(f"{p}.focus: must be 'direction' or 'length'")
        if not 0 <= item.correct < len(item.options):
            raise BankError(f"{p}.correct: option index out of range")
        if item.weight <= 0:
            raise BankError(f"{p}.weight: must be positive")
        items.append(item)
    if [it.id for it in items] != list(range(1, MCQ_COUNT + 1)):
        raise BankError("mcq ids must be exactly 1..4 in order")
    dir_w = [it.weight for it in items if it.focus == "direction"]
    len_w = [it.weight for it in items if it.focus == "length"]
    if not dir_w or not len_w or min(dir_w) <= max(len_w):
        raise BankError("direction questions must outweigh length questions")
    return items
