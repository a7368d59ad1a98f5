"""Choosing the subarray count ``k`` and spacing ``d_s``.

The dominant-LoS relaxation replaces the capacity by the flatness of the
LoS phase matrix: ``||G_1 G_1^H - k I||_F^2``, which after a second-order
expansion of the reference distances becomes

    f(d_s) = sum_{a,b} sum_{i<l} 2 cos(2 pi d_s^2 psi_abil / (lambda D)),
    psi_abil = (x_a - x_b)(x_l - x_i) + (z_a - z_b)(z_l - z_i).

``f`` is minimised per ``k`` by multistart projected gradient descent and
the best ``k`` is then picked on the true water-filled capacity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .beamforming import BeamformerSet, closed_form_wsms
from .channel import PathSet, wsms_singular_values
from .geometry import (
    ArrayLayout,
    GeometryError,
    build_layout,
    feasible_k_set,
    max_subarray_spacing,
    min_subarray_spacing,
)
from .numerics import capacity_from_singular_values

__all__ = [
    "ConfigSolution",
    "psi_table",
    "dlr_objective",
    "dlr_gradient",
    "optimize_spacing",
    "spacing_bounds",
    "config_capacity",
    "dlr_select",
    "exhaustive_search",
    "weighted_dlr",
    "full_pipeline",
]

_TIE = 1e-12


@dataclass(frozen=True)
class ConfigSolution:
    k: int
    d_s: float
    objective_se: float
    method: str  # "DLR" | "exhaustive" | "weighted-DLR"
    d_s_bounds: Tuple[float, float] = (0.0, math.inf)

    def layouts(self, scenario) -> Tuple[ArrayLayout, ArrayLayout]:
        return _layouts(scenario, self.k, self.d_s, scenario.distance)


def psi_table(ref_tx, ref_rx=None) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct ``psi`` values with their multiplicities.

    ``a, b`` run over receive references and ``i < l`` over transmit
    references; when only one index set is given it serves both ends.
    """
    t = np.asarray(ref_tx, dtype=float).reshape(-1, 2)
    r = t if ref_rx is None else np.asarray(ref_rx, dtype=float).reshape(-1, 2)
    k = t.shape[0]
    if k < 2:
        return np.zeros(0), np.zeros(0)
    i, l = np.triu_indices(k, 1)
    dt = t[l] - t[i]                                  # (P, 2)
    dr = r[:, None, :] - r[None, :, :]                # (k, k, 2)
    psi = np.einsum("abc,pc->abp", dr, dt).ravel()
    vals, counts = np.unique(np.round(psi, 9), return_counts=True)
    return vals, counts.astype(float)


def _chirp(wavelength: float, distance: float) -> float:
    return 2.0 * math.pi / (wavelength * distance)


def dlr_objective(d_s, ref_tx, wavelength: float, distance: float, ref_rx=None, _table=None):
    """Taylor-expanded flatness objective ``f(d_s)``; vectorised over ``d_s``."""
    vals, counts = psi_table(ref_tx, ref_rx) if _table is None else _table
    d = np.asarray(d_s, dtype=float)
    if vals.size == 0:
        return np.zeros_like(d) if d.ndim else 0.0
    c = _chirp(wavelength, distance)
    arg = c * (d[..., None] ** 2) * vals
    out = 2.0 * np.cos(arg) @ counts
    return out if d.ndim else float(out)


def dlr_gradient(d_s, ref_tx, wavelength: float, distance: float, ref_rx=None, _table=None):
    """Analytic ``df/dd_s``; vectorised over ``d_s``."""
    vals, counts = psi_table(ref_tx, ref_rx) if _table is None else _table
    d = np.asarray(d_s, dtype=float)
    if vals.size == 0:
        return np.zeros_like(d) if d.ndim else 0.0
    c = _chirp(wavelength, distance)
    arg = c * (d[..., None] ** 2) * vals
    out = (-2.0 * np.sin(arg) * (2.0 * c * d[..., None] * vals)) @ counts
    return out if d.ndim else float(out)


def _descend(
    f: Callable[[np.ndarray], np.ndarray],
    g: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    lo: float,
    hi: float,
    max_iter: int = 200,
    tol: float = 1e-14,
) -> np.ndarray:
    """Vectorised projected gradient descent with Armijo backtracking."""
    x = x0.copy()
    fx = f(x)
    step = np.full_like(x, (hi - lo) / max(8, x.size))
    active = np.ones(x.shape, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        gx = g(x)
        trial_step = step.copy()
        accepted = np.zeros_like(active)
        x_new = x.copy()
        f_new = fx.copy()
        for _ in range(40):
            pending = active & ~accepted
            if not pending.any():
                break
            cand = np.clip(x - trial_step * gx, lo, hi)
            fc = f(cand)
            ok = pending & (fc <= fx - 1e-4 * gx * (x - cand))
            x_new[ok], f_new[ok] = cand[ok], fc[ok]
            accepted |= ok
            trial_step[pending & ~ok] *= 0.5
        moved = np.abs(x_new - x)
        active &= accepted & (moved > tol * np.maximum(1.0, np.abs(x)))
        x, fx = x_new, f_new
        step = np.where(accepted, trial_step * 2.0, trial_step)
    return x


def optimize_spacing(
    ref_tx,
    bounds: Tuple[float, float],
    wavelength: float,
    distance,
    ref_rx=None,
    weights: Optional[Sequence[float]] = None,
    multistart: int = 64,
) -> float:
    """Minimise ``f`` (or a probability-weighted sum over distances) on ``bounds``.

    Seeds a uniform grid of at least ``multistart`` points, dense enough to
    put several seeds in every oscillation of ``f``, then descends from
    each.  Among equal minima the smallest spacing wins.
    """
    lo, hi = float(bounds[0]), float(bounds[1])
    if not (lo <= hi) or not math.isfinite(lo):
        raise ValueError(f"empty spacing interval [{lo}, {hi}]")
    distances = np.atleast_1d(np.asarray(distance, dtype=float))
    w = np.ones(1) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != distances.shape:
        raise ValueError("weights and distances must pair up")
    table = psi_table(ref_tx, ref_rx)
    if table[0].size == 0 or hi == lo:
        return lo
    if not math.isfinite(hi):
        raise ValueError("upper spacing bound must be finite for k > 1")

    def f(x):
        return sum(wq * dlr_objective(x, ref_tx, wavelength, dq, ref_rx, table) for wq, dq in zip(w, distances))

    def g(x):
        return sum(wq * dlr_gradient(x, ref_tx, wavelength, dq, ref_rx, table) for wq, dq in zip(w, distances))

    # phase swept across the interval by the fastest term, in half-periods
    sweep = _chirp(wavelength, distances.min()) * np.abs(table[0]).max() * (hi * hi - lo * lo)
    n_seeds = int(min(20000, max(multistart, math.ceil(4.0 * sweep / math.pi))))
    seeds = np.linspace(lo, hi, n_seeds)
    ends = _descend(f, g, seeds, lo, hi)
    cand = np.concatenate([ends, [lo, hi]])
    vals = f(cand)
    best = vals.min()
    scale = max(1.0, float(np.abs(vals).max()))
    near = cand[vals <= best + _TIE * scale * 1e3]
    return float(near.min())


def spacing_bounds(scenario, k: int) -> Tuple[float, float]:
    """``[d_s^min, d_s^max]`` for both terminals; ``(d, d)`` when ``k == 1``."""
    lam = scenario.wavelength
    lo = max(min_subarray_spacing(scenario.n_tx, k, lam), min_subarray_spacing(scenario.n_rx, k, lam))
    if scenario.ds_min is not None:
        lo = max(lo, scenario.ds_min)
    if k == 1:
        return lo, lo
    hi = min(
        max_subarray_spacing(scenario.n_tx, k, lam, scenario.aperture_max),
        max_subarray_spacing(scenario.n_rx, k, lam, scenario.aperture_max),
    )
    if scenario.ds_max is not None:
        hi = min(hi, scenario.ds_max)
    return lo, hi


def _layouts(scenario, k: int, d_s: float, distance: float) -> Tuple[ArrayLayout, ArrayLayout]:
    lam = scenario.wavelength
    tx = build_layout(scenario.n_tx, k, d_s, lam, 0.0)
    rx = build_layout(scenario.n_rx, k, d_s, lam, distance)
    return tx, rx


def _candidate_ks(scenario) -> Tuple[int, ...]:
    if scenario.k is not None:
        return (scenario.k,)
    return feasible_k_set(scenario.n_tx, scenario.n_rx, widen=scenario.widen_k)


def config_capacity(scenario, k: int, d_s: float, total_power: float, paths: Optional[PathSet] = None) -> float:
    """Capacity with ``k N_p`` streams at ``(k, d_s)``; the selection score."""
    if paths is None:
        paths = scenario.paths()
    tx, rx = _layouts(scenario, k, d_s, paths.distance)
    s = wsms_singular_values(paths, tx, rx, scenario.wavelength)
    return capacity_from_singular_values(s, total_power, scenario.noise_power, k * len(paths))


def _pick(cands: Iterable[ConfigSolution]) -> ConfigSolution:
    cands = list(cands)
    if not cands:
        raise ValueError("no feasible (k, d_s) candidate")
    best = max(c.objective_se for c in cands)
    tol = _TIE * max(1.0, abs(best))
    tied = [c for c in cands if c.objective_se >= best - tol]
    return min(tied, key=lambda c: (c.d_s, c.k))


def _weighted_capacity(scenario, k, d_s, total_power, dist_weights):
    return sum(
        p * config_capacity(scenario, k, d_s, total_power, scenario.paths(d)) for d, p in dist_weights
    )


def dlr_select(scenario, total_power: Optional[float] = None) -> ConfigSolution:
    """Pick ``(k, d_s)``: per-k spacing from ``f``, then the k with the best capacity."""
    power = scenario.transmit_power if total_power is None else total_power
    paths = scenario.paths()
    cands: List[ConfigSolution] = []
    for k in _candidate_ks(scenario):
        try:
            lo, hi = spacing_bounds(scenario, k)
            refs = build_layout(scenario.n_tx, k, lo, scenario.wavelength).ref_indices
            d_s = optimize_spacing(refs, (lo, hi), scenario.wavelength, paths.distance, multistart=scenario.multistart)
            se = config_capacity(scenario, k, d_s, power, paths)
        except (ValueError, GeometryError):
            continue
        cands.append(ConfigSolution(k, d_s, se, "DLR", (lo, hi)))
    return _pick(cands)


def exhaustive_search(scenario, resolution: int = 200, total_power: Optional[float] = None) -> ConfigSolution:
    """Grid oracle over every feasible ``k`` and ``resolution`` spacings per ``k``."""
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    power = scenario.transmit_power if total_power is None else total_power
    paths = scenario.paths()
    cands: List[ConfigSolution] = []
    for k in _candidate_ks(scenario):
        try:
            lo, hi = spacing_bounds(scenario, k)
        except GeometryError:
            continue
        if hi < lo:
            continue
        grid = np.linspace(lo, hi, resolution) if hi > lo else np.array([lo])
        for d_s in grid:
            se = config_capacity(scenario, k, float(d_s), power, paths)
            cands.append(ConfigSolution(k, float(d_s), se, "exhaustive", (lo, hi)))
    return _pick(cands)


def weighted_dlr(scenario, total_power: Optional[float] = None) -> ConfigSolution:
    """DLR over a distance distribution ``[(D_q, p_q), ...]``.

    Spacing minimises ``sum_q p_q f(d_s, D_q)``; ``k`` maximises the
    probability-weighted capacity.
    """
    dist = scenario.distance_distribution or ((scenario.distance, 1.0),)
    probs = np.array([p for _, p in dist], dtype=float)
    if np.any(probs < 0) or not math.isclose(probs.sum(), 1.0, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError("distance probabilities must be nonnegative and sum to 1")
    ds = np.array([d for d, _ in dist], dtype=float)
    if np.any(ds <= 0):
        raise ValueError("distances must be positive")
    power = scenario.transmit_power if total_power is None else total_power
    cands: List[ConfigSolution] = []
    for k in _candidate_ks(scenario):
        try:
            lo, hi = spacing_bounds(scenario, k)
            refs = build_layout(scenario.n_tx, k, lo, scenario.wavelength).ref_indices
            d_s = optimize_spacing(
                refs, (lo, hi), scenario.wavelength, ds, weights=probs, multistart=scenario.multistart
            )
            se = _weighted_capacity(scenario, k, d_s, power, dist)
        except (ValueError, GeometryError):
            continue
        cands.append(ConfigSolution(k, d_s, se, "weighted-DLR", (lo, hi)))
    return _pick(cands)


def full_pipeline(scenario, total_power: Optional[float] = None) -> Tuple[ConfigSolution, BeamformerSet]:
    """Array configuration followed by the closed-form beamformer at that configuration."""
    power = scenario.transmit_power if total_power is None else total_power
    sol = dlr_select(scenario, power)
    paths = scenario.paths()
    tx, rx = _layouts(scenario, sol.k, sol.d_s, paths.distance)
    bf = closed_form_wsms(paths, tx, rx, power, scenario.noise_power, scenario.wavelength)
    return sol, bf
