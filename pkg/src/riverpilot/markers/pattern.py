"""Seeded random-dot pattern generation and its canonical file format."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

D_MIN_MM = 8.0
_REJECTION_BUDGET = 100_000


class PlacementExhausted(RuntimeError):
    """The rejection sampler ran out of draws before placing every dot."""


@dataclass(frozen=True)
class DotPattern:
    id: str
    dots: np.ndarray  # (N, 2) sheet mm
    bounds: tuple[float, float]  # width, height mm
    seed: int

    def __len__(self) -> int:
        return len(self.dots)


def generate_pattern(
    n_dots: int,
    bounds: tuple[float, float],
    seed: int,
    marker_id: str | None = None,
    d_min: float = D_MIN_MM,
) -> DotPattern:
    """Rejection-sample dots keeping every pair at least d_min apart."""
    if n_dots < 20:
        raise ValueError("a marker needs at least 20 dots")
    width, height = float(bounds[0]), float(bounds[1])
    rng = np.random.default_rng(seed)
    placed = np.empty((n_dots, 2))
    count = 0
    for _draw in range(_REJECTION_BUDGET):
        p = rng.uniform((0.0, 0.0), (width, height))
        if count and (((placed[:count] - p) ** 2).sum(axis=1) < d_min * d_min).any():
            continue
        placed[count] = p
        count += 1
        if count == n_dots:
            break
    else:
        raise PlacementExhausted(
            f"placed {count}/{n_dots} dots in {_REJECTION_BUDGET} draws"
        )
    return DotPattern(
        id=marker_id if marker_id is not None else f"marker-{seed}",
        dots=placed,
        bounds=(width, height),
        seed=seed,
    )


def save_pattern(pattern: DotPattern, path: str) -> None:
    payload = {
        "id": pattern.id,
        "seed": pattern.seed,
        "bounds_mm": [pattern.bounds[0], pattern.bounds[1]],
        "dots": pattern.dots.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_pattern(path: str) -> DotPattern:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return DotPattern(
        id=str(raw["id"]),
        dots=np.asarray(raw["dots"], dtype=float),
        bounds=(float(raw["bounds_mm"][0]), float(raw["bounds_mm"][1])),
        seed=int(raw["seed"]),
    )
