"""Shared linear-algebra kernels: SVD, water-filling, capacity and numerical rank."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

__all__ = [
    "WaterFillResult",
    "svd",
    "water_fill",
    "capacity",
    "capacity_from_singular_values",
    "numerical_rank",
]


@dataclass(frozen=True)
class WaterFillResult:
    allocations: np.ndarray
    water_level: float
    active_count: int


def svd(h: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``h = U @ diag(s) @ V.conj().T`` with singular values non-increasing.

    Returns ``(U, s, V)``; note ``V`` rather than its conjugate transpose.
    """
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    u, s, vh = np.linalg.svd(h, full_matrices=True)
    return u, s, vh.conj().T


def water_fill(singular_values, total_power: float, noise_power: float) -> WaterFillResult:
    """Capacity-optimal power split ``rho_i = (Gamma - noise / r_i**2)^+``.

    Exact active-set solve: channels are sorted by gain and the largest
    prefix whose weakest member still sits below the water level is kept.
    Allocations come back in the input order.
    """
    r = np.abs(np.asarray(singular_values, dtype=float)).ravel()
    if total_power <= 0 or noise_power <= 0:
        raise ValueError("total power and noise power must be positive")
    if not np.any(r > 0):
        raise ValueError("water-filling needs at least one positive singular value")

    order = np.argsort(-r, kind="stable")
    positive = order[r[order] > 0]
    floors = noise_power / r[positive] ** 2  # non-decreasing

    csum = np.cumsum(floors)
    counts = np.arange(1, floors.size + 1)
    levels = (total_power + csum) / counts
    feasible = levels > floors
    m = int(np.flatnonzero(feasible)[-1]) + 1
    level = float(levels[m - 1])

    # budget share plus deviation from the mean floor; avoids cancelling
    # level - floor when the floors dwarf the budget
    act = floors[:m]
    share = total_power / m + (act.mean() - act)
    share += (total_power - share.sum()) / m
    alloc = np.zeros_like(r)
    alloc[positive[:m]] = np.maximum(share, 0.0)
    return WaterFillResult(allocations=alloc, water_level=level, active_count=m)


def capacity_from_singular_values(
    singular_values, total_power: float, noise_power: float, stream_cap: Optional[int] = None
) -> float:
    """Water-filled capacity in bits/s/Hz over the given sub-channel gains."""
    r = np.sort(np.abs(np.asarray(singular_values, dtype=float)).ravel())[::-1]
    if stream_cap is not None:
        r = r[:stream_cap]
    if r.size == 0 or not np.any(r > 0):
        return 0.0
    wf = water_fill(r, total_power, noise_power)
    return float(np.sum(np.log2(1.0 + wf.allocations * r**2 / noise_power)))


def capacity(h, total_power: float, noise_power: float, stream_cap: Optional[int] = None) -> float:
    """Fully-digital capacity of ``h`` with water-filling.

    ``stream_cap`` keeps only the strongest sub-channels, which gives the
    capacity reachable with that many data streams.
    """
    h = getattr(h, "entries", h)
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(h, compute_uv=False)
    return capacity_from_singular_values(s, total_power, noise_power, stream_cap)


def numerical_rank(h, gap_threshold: float = 1e3) -> int:
    """Rank read off the largest singular-value gap of at least ``gap_threshold``.

    Picks the largest ``r`` with ``s[r-1] / s[r] >= gap_threshold`` and
    ``s[r-1] > 1e-12 * s[0]``; without such a gap the matrix counts as full
    rank.  The zero matrix has rank 0.
    """
    if gap_threshold <= 1:
        raise ValueError("gap_threshold must exceed 1")
    h = np.asarray(getattr(h, "entries", h))
    s = np.linalg.svd(h, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    floor = 1e-12 * s[0]
    best = 0
    for r in range(1, s.size):
        if s[r - 1] <= floor:
            break
        if s[r] == 0 or s[r - 1] / s[r] >= gap_threshold:
            best = r
    return best if best else s.size
