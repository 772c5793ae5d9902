"""Affine-invariant neighborhood hashing for dot identification.

Each dot is described by its 8 nearest neighbors taken in angular order
around it.  For every 7-of-8 subset (tolerating one missing neighbor) the
ring is anchored at its farthest member, the triangle areas of consecutive
point triples along the ring are taken, and the sequence of consecutive
area ratios is quantized into 16 log-spaced bins and folded into an integer
key.  Anchoring fixes the cyclic start without trying every shift; of the
two traversal directions the smaller key is kept, so mirrored views hash
identically (reciprocal ratios land in mirrored bins).

The registry stores exactly one key per subset.  Lookup-side noise is
handled in query_keys: when a ratio sits within epsilon of a bin edge, or
when the two farthest subset members are nearly tied, the neighboring keys
are emitted as well, so a pixel of jitter costs a few extra probes instead
of the match.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from riverpilot.markers.pattern import DotPattern


class TooFewDots(ValueError):
    """A pattern is too small to give every dot a full neighborhood."""


@dataclass(frozen=True)
class LlahParams:
    n_neighbors: int = 8
    subset_size: int = 7
    quant_levels: int = 16
    ratio_min: float = 1.0 / 50.0
    ratio_max: float = 50.0
    # Detection tunables; the acceptance bench validates these defaults.
    vote_threshold: int = 10
    min_inlier_ratio: float = 0.4
    # Query-side branching: flip digits whose log-ratio is within
    # digit_epsilon of a bin edge (up to max_flip_digits of them, all
    # combinations), retry the anchor when the farthest two subset members
    # are within anchor_epsilon_px of each other.
    digit_epsilon: float = 0.15
    max_flip_digits: int = 3
    anchor_epsilon_px: float = 4.0


DEFAULT_PARAMS = LlahParams()


def _bin_edges(params: LlahParams) -> np.ndarray:
    return np.geomspace(params.ratio_min, params.ratio_max, params.quant_levels + 1)


def _fold(digits: np.ndarray, params: LlahParams) -> np.ndarray:
    """Fold digit sequences (…, m) into keys; direction-canonical."""
    m = digits.shape[-1]
    top = params.quant_levels - 1
    powers = params.quant_levels ** np.arange(m, dtype=np.int64)
    # Reversing the ring reverses and reciprocates the ratio sequence; with
    # log-symmetric bins that is a digit permutation plus complement.
    mirror = (m - 3 - np.arange(m)) % m
    forward = digits @ powers
    backward = (top - digits[..., mirror]) @ powers
    return np.minimum(forward, backward)


class _SubsetDigits:
    """Quantized ratio sequences for every drop-one subset of every ring."""

    def __init__(self, points: np.ndarray, params: LlahParams):
        pts = np.asarray(points, dtype=float)
        n = params.n_neighbors
        m = params.subset_size
        count = len(pts)
        if count <= n:
            raise TooFewDots(f"need more than {n} points, got {count}")
        diff = pts[None, :, :] - pts[:, None, :]
        d2 = (diff**2).sum(axis=2)
        np.fill_diagonal(d2, np.inf)
        nbr = np.argsort(d2, axis=1, kind="stable")[:, :n]
        rel = np.take_along_axis(diff, nbr[:, :, None], axis=1)  # (N, n, 2)
        ang = np.arctan2(rel[:, :, 1], rel[:, :, 0])
        order = np.argsort(ang, axis=1)
        ring = np.take_along_axis(rel, order[:, :, None], axis=1)
        ring_d2 = (ring**2).sum(axis=2)

        edges = _bin_edges(params)
        log_edges = np.log(edges)
        top = params.quant_levels - 1
        rows = np.arange(count)[:, None]

        # Cyclic (un-anchored) digit sequences, one per drop-one subset.
        self.digits = np.empty((count, n, m), dtype=np.int64)
        self.edge_gap = np.empty((count, n, m))  # log-distance to nearest edge
        self.flip_dir = np.empty((count, n, m), dtype=np.int64)
        self.anchor = np.empty((count, n), dtype=np.int64)
        self.anchor_2nd = np.empty((count, n), dtype=np.int64)
        self.anchor_gap_px = np.empty((count, n))
        for drop in range(n):
            sub = np.delete(ring, drop, axis=1)  # (N, m, 2)
            sub_d2 = np.delete(ring_d2, drop, axis=1)
            q1 = np.roll(sub, -1, axis=1)
            q2 = np.roll(sub, -2, axis=1)
            v1 = q1 - sub
            v2 = q2 - sub
            areas = np.abs(v1[:, :, 0] * v2[:, :, 1] - v1[:, :, 1] * v2[:, :, 0])
            areas = np.maximum(areas, 1e-12)
            log_r = np.log(areas) - np.log(np.roll(areas, -1, axis=1))
            log_r = np.clip(log_r, log_edges[0], log_edges[-1] - 1e-12)
            digit = np.searchsorted(log_edges, log_r, side="right") - 1
            below = log_r - log_edges[digit]
            above = log_edges[digit + 1] - log_r
            self.digits[:, drop] = digit
            self.edge_gap[:, drop] = np.minimum(below, above)
            self.flip_dir[:, drop] = np.where(below < above, -1, 1)
            first = sub_d2.argmax(axis=1)
            masked = sub_d2.copy()
            masked[rows[:, 0], first] = -np.inf
            second = masked.argmax(axis=1)
            self.anchor[:, drop] = first
            self.anchor_2nd[:, drop] = second
            self.anchor_gap_px[:, drop] = np.sqrt(
                sub_d2[rows[:, 0], first]
            ) - np.sqrt(sub_d2[rows[:, 0], second])
        # Clip flips that would leave the digit range: turn them into no-ops.
        at_floor = (self.digits == 0) & (self.flip_dir < 0)
        at_ceil = (self.digits == top) & (self.flip_dir > 0)
        self.flip_dir[at_floor | at_ceil] = 0
        self.params = params

    def _anchored(self, variants: np.ndarray, anchor: np.ndarray) -> np.ndarray:
        """Rotate cyclic digit variants (N, n, B, m) to start at anchor."""
        count, n, _b, m = variants.shape
        idx = (anchor[:, :, None, None] + np.arange(m)[None, None, None, :]) % m
        return np.take_along_axis(variants, np.broadcast_to(idx, variants.shape), 3)


def point_keys(points: np.ndarray, params: LlahParams = DEFAULT_PARAMS) -> np.ndarray:
    """Registry keys for every point: (N, n) — one per 7-of-8 subset."""
    sd = _SubsetDigits(points, params)
    anchored = sd._anchored(sd.digits[:, :, None, :], sd.anchor)
    return _fold(anchored[:, :, 0, :], params)


def query_keys(points: np.ndarray, params: LlahParams = DEFAULT_PARAMS) -> np.ndarray:
    """Lookup keys per point, (N, n, 8): edge-adjacent and anchor branches.

    Duplicate branches are replaced by -1, which no registry key ever equals.
    """
    sd = _SubsetDigits(points, params)
    count, n, m = sd.digits.shape

    # Up to two flipped digits: the pair closest to their bin edges.
    nearest = np.argsort(sd.edge_gap, axis=2)[:, :, :2]
    gap = np.take_along_axis(sd.edge_gap, nearest, axis=2)
    usable = gap < params.digit_epsilon  # (N, n, 2)
    variants = np.repeat(sd.digits[:, :, None, :], 4, axis=2)  # (N, n, 4, m)
    for slot, which in ((1, (0,)), (2, (1,)), (3, (0, 1))):
        for w in which:
            pos = nearest[:, :, w]
            step = np.where(
                usable[:, :, w],
                np.take_along_axis(sd.flip_dir, pos[:, :, None], axis=2)[:, :, 0],
                0,
            )
            chosen = np.take_along_axis(
                variants[:, :, slot, :], pos[:, :, None], axis=2
            )[:, :, 0]
            np.put_along_axis(
                variants[:, :, slot, :], pos[:, :, None], (chosen + step)[:, :, None], 2
            )

    keys = np.empty((count, n, 8), dtype=np.int64)
    keys[:, :, :4] = _fold(sd._anchored(variants, sd.anchor), sd.params)
    keys[:, :, 4:] = _fold(sd._anchored(variants, sd.anchor_2nd), sd.params)
    retry = sd.anchor_gap_px < params.anchor_epsilon_px
    keys[:, :, 4:][~retry] = -1

    keys.sort(axis=2)
    dup = keys[:, :, 1:] == keys[:, :, :-1]
    keys[:, :, 1:][dup] = -1
    return keys


@dataclass
class DescriptorTable:
    params: LlahParams
    entries: dict[int, list[tuple[str, int]]] = field(default_factory=dict)
    dots: dict[str, np.ndarray] = field(default_factory=dict)  # marker id -> (N, 2)

    @property
    def total_entries(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def lookup(self, key: int):
        return self.entries.get(key, ())

    def flat_index(self):
        """Sorted-array view of entries for vectorized lookup (cached)."""
        cached = getattr(self, "_flat", None)
        if cached is None or cached[0] != self.total_entries:
            marker_ids = sorted(self.dots)
            keys, markers, dot_idx = [], [], []
            number = {mid: i for i, mid in enumerate(marker_ids)}
            for key, bucket in self.entries.items():
                for mid, di in bucket:
                    keys.append(key)
                    markers.append(number[mid])
                    dot_idx.append(di)
            order = np.argsort(np.asarray(keys, dtype=np.int64), kind="stable")
            cached = (
                self.total_entries,
                np.asarray(keys, dtype=np.int64)[order],
                np.asarray(markers, dtype=np.int64)[order],
                np.asarray(dot_idx, dtype=np.int64)[order],
                marker_ids,
            )
            self._flat = cached
        return cached[1:]


def build_table(
    patterns: list[DotPattern], params: LlahParams = DEFAULT_PARAMS
) -> DescriptorTable:
    table = DescriptorTable(params=params)
    for pattern in patterns:
        keys = point_keys(pattern.dots, params)
        table.dots[pattern.id] = np.asarray(pattern.dots, dtype=float)
        for dot_index, row in enumerate(keys):
            for key in row:
                table.entries.setdefault(int(key), []).append((pattern.id, dot_index))
    return table
