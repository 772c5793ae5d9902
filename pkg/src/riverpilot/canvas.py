"""Graphical vector-addition workspace for the final fading stage.

Three pre-supplied summand arrows (ship velocity, current, wind) can be
dragged around a drawing space; they are rigid — translation only — while
the answer arrow is fully editable.  Dragging a start point near another
arrow's end snaps them to exact coincidence and records a tail-to-head
connection; the answer's ends snap onto summand endpoints so it can span
the assembled chain.  Scoring counts the two inter-summand links plus the
answer's two anchors, 4 points max.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

from riverpilot.geometry import Vec2

SNAP_RADIUS_MM = 8.0


class UnknownVector(KeyError):
    """No vector with that id on the canvas."""


class Role(Enum):
    SHIP_VELOCITY = "ship_velocity"
    CURRENT = "current"
    WIND = "wind"
    ANSWER = "answer"


@dataclass
class CanvasVector:
    id: str
    role: Role
    start: Vec2
    end: Vec2
    locked: bool  # rigid: any endpoint move translates the whole arrow

    def delta(self) -> Vec2:
        return self.end - self.start


@dataclass
class CanvasState:
    vectors: dict[str, CanvasVector]
    # (tail id, head id): head's start sits exactly on tail's end.
    connections: set[tuple[str, str]] = field(default_factory=set)
    snap_radius: float = SNAP_RADIUS_MM
    events: list[dict] = field(default_factory=list)

    def summands(self) -> list[CanvasVector]:
        return [v for v in self.vectors.values() if v.role is not Role.ANSWER]

    def answer(self) -> CanvasVector:
        return self.vectors["answer"]

    def to_dict(self) -> dict:
        return {
            "vectors": {
                vid: {
                    "role": v.role.value,
                    "start": [v.start.x, v.start.y],
                    "end": [v.end.x, v.end.y],
                    "locked": v.locked,
                }
                for vid, v in sorted(self.vectors.items())
            },
            "connections": sorted(self.connections),
        }


def new_canvas(
    ship_velocity: Vec2, current: Vec2, wind: Vec2, origin: Vec2 = Vec2(60.0, 80.0)
) -> CanvasState:
    """Lay out the three locked summands in a row plus a free answer arrow."""
    spacing = Vec2(110.0, 0.0)
    vecs = {}
    for i, (vid, role, delta) in enumerate(
        (
            ("ship", Role.SHIP_VELOCITY, ship_velocity),
            ("current", Role.CURRENT, current),
            ("wind", Role.WIND, wind),
        )
    ):
        start = origin + i * spacing
        vecs[vid] = CanvasVector(vid, role, start, start + delta, locked=True)
    answer_start = origin + Vec2(0.0, 140.0)
    vecs["answer"] = CanvasVector(
        "answer", Role.ANSWER, answer_start, answer_start + Vec2(50.0, 0.0), locked=False
    )
    return CanvasState(vectors=vecs)


def chain_sum(canvas: CanvasState) -> Vec2:
    """Geometric sum of the summand arrows, connections notwithstanding."""
    total = Vec2(0.0, 0.0)
    for v in canvas.summands():
        total = total + v.delta()
    return total


def _coincide(a: Vec2, b: Vec2) -> bool:
    return a.x == b.x and a.y == b.y


def _drop_stale_connections(canvas: CanvasState) -> None:
    stale = [
        (tail, head)
        for tail, head in canvas.connections
        if not _coincide(canvas.vectors[tail].end, canvas.vectors[head].start)
    ]
    for pair in stale:
        canvas.connections.discard(pair)
        canvas.events.append({"type": "Unsnapped", "tail": pair[0], "head": pair[1]})


def _would_cycle(canvas: CanvasState, tail: str, head: str) -> bool:
    edges = canvas.connections | {(tail, head)}
    adj: dict[str, list[str]] = {}
    for t, h in edges:
        adj.setdefault(t, []).append(h)
    # Tiny graph: walk from head looking for tail.
    stack, seen = [head], set()
    while stack:
        node = stack.pop()
        if node == tail:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(adj.get(node, ()))
    return False


def _snap_candidates(canvas: CanvasState, vid: str, which: str):
    """Points the given endpoint may snap onto: (anchor point, connection)."""
    v = canvas.vectors[vid]
    out = []
    for other in canvas.vectors.values():
        if other.id == vid:
            continue
        if v.role is Role.ANSWER:
            if other.role is Role.ANSWER:
                continue
            # Answer start sits on a summand start, answer end on a summand
            # end, so an anchored answer spans the chain.
            anchor = other.start if which == "start" else other.end
            out.append((anchor, None))
        else:
            if other.role is Role.ANSWER:
                continue
            if which == "start":
                out.append((other.end, (other.id, vid)))
            else:
                out.append((other.start, (vid, other.id)))
    return out


def _apply_snap(canvas: CanvasState, vid: str, which: str) -> bool:
    v = canvas.vectors[vid]
    point = getattr(v, which)
    best = None
    for anchor, conn in _snap_candidates(canvas, vid, which):
        dist = (point - anchor).magnitude()
        if dist <= canvas.snap_radius and (best is None or dist < best[0]):
            best = (dist, anchor, conn)
    if best is None:
        return False
    _dist, anchor, conn = best
    if conn is not None:
        tail, head = conn
        if _would_cycle(canvas, tail, head):
            return False
        # A start point accepts at most one incoming connection.
        if any(h == head for _t, h in canvas.connections):
            canvas.connections = {c for c in canvas.connections if c[1] != head}
    delta = anchor - point
    if v.locked:
        v.start = v.start + delta
        v.end = v.end + delta
    else:
        setattr(canvas.vectors[vid], which, anchor)
    if conn is not None:
        canvas.connections.add(conn)
        canvas.events.append({"type": "Snapped", "tail": conn[0], "head": conn[1]})
    return True


def move_endpoint(canvas: CanvasState, vid: str, which: str, target: Vec2) -> CanvasState:
    """Drag one endpoint; rigid arrows translate, then snapping applies."""
    if vid not in canvas.vectors:
        raise UnknownVector(vid)
    if which not in ("start", "end"):
        raise ValueError(f"endpoint must be 'start' or 'end', got {which!r}")
    v = canvas.vectors[vid]
    if v.locked:
        delta = target - getattr(v, which)
        v.start = v.start + delta
        v.end = v.end + delta
    else:
        setattr(v, which, target)
    canvas.events.append(
        {"type": "EndpointMoved", "vector": vid, "end": which, "pos": [target.x, target.y]}
    )
    _drop_stale_connections(canvas)
    # Try the dragged endpoint first; a rigid translate may have carried
    # the other endpoint into snap range too, but only one snap applies
    # per move so the arrow is never torn between two anchors.
    for endpoint in (which, "end" if which == "start" else "start"):
        if endpoint != which and not v.locked:
            break
        if _apply_snap(canvas, vid, endpoint):
            break
    _drop_stale_connections(canvas)
    if _answer_spans_chain(canvas):
        canvas.events.append({"type": "AnswerSet"})
    return canvas


def set_ship_direction(canvas: CanvasState, heading: float, speed: float) -> CanvasState:
    """Re-aim the ship arrow (system update on velocity change)."""
    v = canvas.vectors["ship"]
    v.end = Vec2(v.start.x + speed * math.cos(heading), v.start.y + speed * math.sin(heading))
    canvas.events.append(
        {"type": "EndpointMoved", "vector": "ship", "end": "end", "pos": [v.end.x, v.end.y]}
    )
    _drop_stale_connections(canvas)
    return canvas


def _full_chain(canvas: CanvasState):
    """The ordering of the three summands fully linked tail-to-head, if any."""
    ids = [v.id for v in canvas.summands()]
    for perm in itertools.permutations(ids):
        if all((perm[i], perm[i + 1]) in canvas.connections for i in range(len(perm) - 1)):
            return perm
    return None


def _chain_link_count(canvas: CanvasState) -> int:
    # Longest tail-to-head run over the summands: only consecutive links
    # form a single chain, so a fork contributes one link, not two.
    ids = [v.id for v in canvas.summands()]
    best = 0
    for perm in itertools.permutations(ids):
        run = 0
        for i in range(len(perm) - 1):
            if (perm[i], perm[i + 1]) in canvas.connections:
                run += 1
            else:
                break
        best = max(best, run)
    return best


def _answer_spans_chain(canvas: CanvasState) -> bool:
    perm = _full_chain(canvas)
    if perm is None:
        return False
    ans = canvas.answer()
    first = canvas.vectors[perm[0]]
    last = canvas.vectors[perm[-1]]
    return _coincide(ans.start, first.start) and _coincide(ans.end, last.end)


def score_canvas(canvas: CanvasState, level=None) -> int:
    """Connection score 0..4: two chain links plus two answer anchors."""
    links = _chain_link_count(canvas)
    score = links
    perm = _full_chain(canvas)
    if perm is not None:
        ans = canvas.answer()
        first = canvas.vectors[perm[0]]
        last = canvas.vectors[perm[-1]]
        if _coincide(ans.start, first.start):
            score += 1
        if _coincide(ans.end, last.end):
            score += 1
    return min(4, score)
