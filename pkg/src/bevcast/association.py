"""Match extracted positions to the vehicle identities they belong to.

Each predicted frame is associated independently against the anchors,
the vehicles of the latest observed frame.  The match minimizes total
Euclidean distance in meters and has size min(#extracted, #anchors):
surplus extractions are dropped, surplus anchors are reported missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["Association", "associate"]

Point = tuple[float, float]


@dataclass(frozen=True)
class Association:
    """Result of one frame's matching."""

    matches: tuple[tuple[str, Point], ...]
    missed_ids: tuple[str, ...]
    total_cost: float


def associate(
    extracted: list[Point],
    anchors: list[tuple[str, Point]],
    max_distance: float | None = None,
) -> Association:
    """Assign extracted points to anchor identities at minimum total cost.

    Args:
        extracted: candidate positions in meters.
        anchors: (id, position) pairs from the latest observed frame.
        max_distance: optional gate; matches farther than this are
            discarded and their anchors counted as missed.

    Returns:
        Association with matches ordered by anchor order, the missed
        anchor ids, and the total Euclidean cost of the kept matches.
    """
    if not extracted or not anchors:
        return Association(
            matches=(),
            missed_ids=tuple(aid for aid, _ in anchors),
            total_cost=0.0,
        )
    pts = np.asarray(extracted, dtype=np.float64)
    ref = np.asarray([pos for _, pos in anchors], dtype=np.float64)
    cost = np.sqrt(((ref[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    rows, cols = linear_sum_assignment(cost)
    matched: dict[int, int] = dict(zip(rows.tolist(), cols.tolist()))
    matches = []
    missed = []
    total = 0.0
    for i, (aid, _) in enumerate(anchors):
        j = matched.get(i)
        if j is None:
            missed.append(aid)
            continue
        d = float(cost[i, j])
        if max_distance is not None and d > max_distance:
            missed.append(aid)
            continue
        matches.append((aid, (float(pts[j, 0]), float(pts[j, 1]))))
        total += d
    if not math.isfinite(total):
        raise ValueError("non-finite distances in association input")
    return Association(
        matches=tuple(matches), missed_ids=tuple(missed), total_cost=total
    )
