"""Multi-target miss distance between finite state sets.

Implements the optimal-subpattern-assignment distance on positional
Euclidean error with a cutoff, decomposed into a localization term (from
matched pairs) and a cardinality term (from the unmatched count). With
order 1 the two terms add up to the total exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass(frozen=True)
class OspaParams:
    """Cutoff (meters, > 0) and order (>= 1) of the miss distance."""

    cutoff: float = 20.0
    order: float = 1.0

    def __post_init__(self):
        if self.cutoff <= 0.0:
            raise ValueError("cutoff must be positive")
        if self.order < 1.0:
            raise ValueError("order must be at least 1")


@dataclass(frozen=True)
class OspaResult:
    """Total miss distance and its localization/cardinality split."""

    total: float
    localization: float
    cardinality: float


def solve_assignment(cost):
    """Minimum-cost matching of size min(m, n) on an (m, n) cost matrix.

    Returns ``(rows, cols)`` index arrays; empty matrices yield empty
    assignments. Costs must be finite and nonnegative.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.size == 0:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    if not np.all(np.isfinite(cost)) or cost.min() < 0.0:
        raise ValueError("assignment costs must be finite and nonnegative")
    rows, cols = linear_sum_assignment(cost)
    return rows, cols


def _positions(states) -> np.ndarray:
    states = np.asarray(states, dtype=float)
    if states.size == 0:
        return np.empty((0, 2))
    if states.ndim == 1:
        states = states[None, :]
    if states.shape[1] == 4:
        return states[:, [0, 2]]
    if states.shape[1] == 2:
        return states
    raise ValueError("state sets must have 2 (position) or 4 (full) columns")


def ospa(x_set, y_set, params: OspaParams = OspaParams()) -> OspaResult:
    """Miss distance between two finite sets of target states.

    Accepts (n, 2) position arrays or (n, 4) state arrays (positions are
    taken from the x/y columns); either set may be empty. Symmetric in its
    arguments.
    """
    x = _positions(x_set)
    y = _positions(y_set)
    if x.shape[0] > y.shape[0]:
        x, y = y, x
    m, n = x.shape[0], y.shape[0]
    c, p = params.cutoff, params.order
    if n == 0:
        return OspaResult(0.0, 0.0, 0.0)
    if m == 0:
        return OspaResult(c, 0.0, c)

    dist = np.hypot(x[:, None, 0] - y[None, :, 0], x[:, None, 1] - y[None, :, 1])
    cost = np.minimum(dist, c) ** p
    rows, cols = solve_assignment(cost)
    loc_pp = float(cost[rows, cols].sum())
    card_pp = c**p * (n - m)
    total = ((loc_pp + card_pp) / n) ** (1.0 / p)
    localization = (loc_pp / n) ** (1.0 / p)
    cardinality = (card_pp / n) ** (1.0 / p)
    return OspaResult(total, localization, cardinality)
