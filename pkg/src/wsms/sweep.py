"""Parameter sweeps across architectures, written as CSV.

An axis is ``NAME=START:STOP:STEP`` with an inclusive stop; several axes
form a cartesian product (first axis varies slowest).  Known axes:

``rho``  transmit power, dBm
``k``    subarray count (fixed instead of searched)
``ds``   subarray spacing in metres (fixed instead of optimised)
``N``    antennas per terminal, ``N_t = N_r = N``
``D``    link distance in metres

Every point evaluates the requested architectures on the same scenario.
A point that cannot be built (``k`` not dividing ``N``, spacing below
the overlap limit, rank-deficient channel) yields rows with a ``status``
and empty numeric fields rather than stopping the sweep.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from .arrayconfig import ConfigSolution, config_capacity, dlr_select
from .beamforming import DegenerateChannelError, closed_form_wsms, evaluate_se
from .channel import (
    assemble_los_mimo_channel,
    assemble_planar_channel,
    assemble_wsms_channel,
    grid_positions,
    steering_vector,
)
from .config import ConfigError, ScenarioConfig, dbm_to_watt
from .geometry import GeometryError, aperture, build_layout, feasible_k_set, near_square
from .numerics import capacity
from .power import energy_efficiency, link_power

__all__ = [
    "AXES",
    "SWEEP_ARCHITECTURES",
    "CSV_HEADER",
    "SweepError",
    "SweepRow",
    "SweepResult",
    "parse_axis",
    "sweep_points",
    "evaluate_point",
    "run_sweep",
]

AXES = ("rho", "k", "ds", "N", "D")
SWEEP_ARCHITECTURES = ("wsms", "planar-baseline", "aosa", "los-mimo")
CSV_HEADER = (
    "scenario_id",
    "architecture",
    "n_tx",
    "n_rx",
    "k",
    "d_s",
    "rho_dbm",
    "distance",
    "se",
    "capacity",
    "power_w",
    "ee",
    "wall_ms",
    "status",
)


class SweepError(ValueError):
    """Malformed axis or architecture list."""


@dataclass
class SweepRow:
    scenario_id: int
    architecture: str
    n_tx: int
    n_rx: int
    k: Optional[int]
    d_s: Optional[float]
    rho_dbm: float
    distance: float
    se: Optional[float] = None
    capacity: Optional[float] = None
    power_w: Optional[float] = None
    ee: Optional[float] = None
    wall_ms: Optional[float] = None
    status: str = "ok"

    def cells(self) -> List[str]:
        out = []
        for name in CSV_HEADER:
            v = getattr(self, name)
            if v is None or (isinstance(v, float) and math.isnan(v)):
                out.append("")
            elif isinstance(v, float):
                out.append(format(v, ".12g"))
            else:
                out.append(str(v))
        return out


@dataclass
class SweepResult:
    rows: List[SweepRow] = field(default_factory=list)
    n_points: int = 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.cells())
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())

    def summary(self) -> str:
        bad = sum(1 for r in self.rows if r.status != "ok")
        return f"sweep: {self.n_points} points, {len(self.rows)} rows, {bad} infeasible"


def parse_axis(text: str) -> Tuple[str, Tuple[float, ...]]:
    """``"rho=-10:20:5"`` -> ``("rho", (-10, -5, ..., 20))``."""
    try:
        name, rng = text.split("=", 1)
        start, stop, step = (float(x) for x in rng.split(":"))
    except ValueError:
        raise SweepError(f"axis {text!r} is not NAME=START:STOP:STEP") from None
    name = name.strip()
    if name not in AXES:
        raise SweepError(f"unknown axis {name!r}; expected one of {', '.join(AXES)}")
    if step == 0 or not all(map(math.isfinite, (start, stop, step))):
        raise SweepError(f"axis {text!r} needs a finite nonzero step")
    if (stop - start) * step < 0:
        raise SweepError(f"axis {text!r}: step points away from stop")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    vals = tuple(float(format(start + i * step, ".12g")) for i in range(n))
    if name in ("k", "N"):
        if any(v != int(v) or v < 1 for v in vals):
            raise SweepError(f"axis {name} takes positive integers")
        vals = tuple(int(v) for v in vals)
    return name, vals


def sweep_points(cfg: ScenarioConfig, axes: Sequence[str]) -> List[Dict[str, float]]:
    parsed = [parse_axis(a) for a in axes]
    names = [n for n, _ in parsed]
    if len(set(names)) != len(names):
        raise SweepError("each axis may appear only once")
    if "rho" not in names:
        parsed.insert(0, ("rho", tuple(cfg.transmit_power_dbm)))
    keys = [n for n, _ in parsed]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in parsed))]


def parse_architectures(text: Optional[str]) -> Tuple[str, ...]:
    if not text:
        return SWEEP_ARCHITECTURES
    archs = tuple(a.strip() for a in text.split(",") if a.strip())
    for a in archs:
        if a not in SWEEP_ARCHITECTURES:
            raise SweepError(f"unknown architecture {a!r}; expected some of {', '.join(SWEEP_ARCHITECTURES)}")
    if len(set(archs)) != len(archs) or not archs:
        raise SweepError("architecture list must be nonempty without repeats")
    return archs


def _wsms_solution(cfg: ScenarioConfig, power: float, d_s: Optional[float]) -> ConfigSolution:
    if d_s is None:
        return dlr_select(cfg, power)
    ks = (cfg.k,) if cfg.k is not None else feasible_k_set(cfg.n_tx, cfg.n_rx, cfg.widen_k)
    paths = cfg.paths()
    best = None
    last_err: Exception = GeometryError("no feasible k")
    for k in ks:
        try:
            se = config_capacity(cfg, k, d_s, power, paths)
        except (GeometryError, ValueError) as exc:
            last_err = exc
            continue
        if best is None or se > best.objective_se * (1 + 1e-12):
            best = ConfigSolution(k, d_s, se, "fixed-spacing")
    if best is None:
        raise last_err
    return best


def _aosa_se(h, tx, rx, paths, wavelength, power, noise) -> float:
    """Capacity behind a fixed analog stage: compact subarray ``j`` steered along path ``j``."""
    f_cols, w_cols = [], []
    for j in range(tx.k):
        p = paths[j % len(paths)]
        f_cols.append(steering_vector(tx.subarray_rows, tx.subarray_cols, tx.d_a, wavelength, *p.aod))
        w_cols.append(steering_vector(rx.subarray_rows, rx.subarray_cols, rx.d_a, wavelength, *p.aoa))
    f = sla.block_diag(*[c[:, None] for c in f_cols]) / math.sqrt(tx.subarray_size)
    w = sla.block_diag(*[c[:, None] for c in w_cols]) / math.sqrt(rx.subarray_size)
    return capacity(w.conj().T @ h @ f, power, noise)


def evaluate_point(
    cfg: ScenarioConfig, point: Dict[str, float], archs: Sequence[str], index: int, timing: bool = False
) -> List[SweepRow]:
    """All architecture rows of one sweep point."""
    rho_dbm = float(point["rho"])
    n = int(point.get("N", 0)) or None
    dist = float(point.get("D", cfg.distance))
    n_tx = n or cfg.n_tx
    n_rx = n or cfg.n_rx
    d_fix = point.get("ds")
    d_fix = None if d_fix is None else float(d_fix)

    def base(arch, k=None, d_s=None):
        return SweepRow(index, arch, n_tx, n_rx, k, d_s, rho_dbm, dist)

    try:
        changes = dict(n_tx=n_tx, n_rx=n_rx, distance=dist, transmit_power_dbm=(rho_dbm,), distance_distribution=None)
        if "k" in point:
            changes["k"] = int(point["k"])
        sc = cfg.replace(**changes)
    except ConfigError as exc:
        return [_failed(base(a, point.get("k"), d_fix), "infeasible", exc) for a in archs]

    power = dbm_to_watt(rho_dbm)
    noise = sc.noise_power
    lam = sc.wavelength
    paths = sc.paths()
    n_p = len(paths)
    rows: List[SweepRow] = []

    sol = None
    sol_err = None
    if any(a in ("wsms", "los-mimo") for a in archs):
        t0 = time.perf_counter()
        try:
            sol = _wsms_solution(sc, power, d_fix)
        except (GeometryError, ValueError, np.linalg.LinAlgError) as exc:
            sol_err = exc
        sol_ms = (time.perf_counter() - t0) * 1e3

    for arch in archs:
        t0 = time.perf_counter()
        row = base(arch)
        try:
            if arch == "planar-baseline":
                row.k = 1
                h = assemble_planar_channel(paths, n_tx, n_rx, lam).entries
                row.capacity = capacity(h, power, noise)
                row.se = capacity(h, power, noise, stream_cap=n_p)
                row.power_w = link_power("fc", n_tx, n_rx, n_p, n_p, power, rx_model=sc.rx_power_model)
            elif arch == "aosa":
                # N_p compact subarrays, one RF chain each
                tx_c = build_layout(n_tx, n_p, None, lam, 0.0)
                rx_c = build_layout(n_rx, n_p, None, lam, dist)
                row.k, row.d_s = n_p, tx_c.d_s
                h = assemble_wsms_channel(paths, tx_c, rx_c, lam).entries
                row.se = _aosa_se(h, tx_c, rx_c, paths, lam, power, noise)
                row.capacity = capacity(h, power, noise)
                row.power_w = link_power("aosa", n_tx, n_rx, n_p, n_p, power, n_p, rx_model=sc.rx_power_model)
            else:
                if sol is None:
                    raise sol_err
                tx = build_layout(n_tx, sol.k, sol.d_s, lam, 0.0)
                rx = build_layout(n_rx, sol.k, sol.d_s, lam, dist)
                row.k, row.d_s = sol.k, sol.d_s
                if arch == "wsms":
                    h = assemble_wsms_channel(paths, tx, rx, lam).entries
                    bf = closed_form_wsms(paths, tx, rx, power, noise, lam)
                    row.se = evaluate_se(h, bf, power, noise)
                    row.capacity = capacity(h, power, noise)
                    l = sol.k * n_p
                    row.power_w = link_power("wsms", n_tx, n_rx, l, l, power, sol.k, rx_model=sc.rx_power_model)
                elif arch == "los-mimo":
                    span = aperture(tx)
                    rows_, cols_ = near_square(n_tx)
                    diag_units = math.hypot(rows_ - 1, cols_ - 1)
                    spacing = max(lam / 2.0, span / diag_units) if diag_units > 0 else lam / 2.0
                    row.k, row.d_s = 1, spacing
                    h = assemble_los_mimo_channel(
                        paths[0].gain,
                        grid_positions(n_tx, spacing, 0.0, sc.height_tx),
                        grid_positions(n_rx, spacing, dist, sc.height_rx),
                        lam,
                    ).entries
                    row.capacity = capacity(h, power, noise)
                    row.se = row.capacity
                    row.power_w = link_power("digital", n_tx, n_rx, n_tx, n_rx, power, rx_model=sc.rx_power_model)
            row.ee = energy_efficiency(row.se, sc.bandwidth, row.power_w)
        except DegenerateChannelError as exc:
            row = _failed(row, "degenerate", exc)
        except np.linalg.LinAlgError as exc:
            row = _failed(row, "numerical", exc)
        except (GeometryError, ValueError) as exc:
            row = _failed(row, "infeasible", exc)
        if timing:
            extra = sol_ms if arch in ("wsms", "los-mimo") and sol is not None else 0.0
            row.wall_ms = (time.perf_counter() - t0) * 1e3 + extra
        rows.append(row)
    return rows


def _failed(row: SweepRow, kind: str, exc: BaseException) -> SweepRow:
    row.se = row.capacity = row.power_w = row.ee = None
    msg = " ".join(str(exc).split()).replace(",", ";")
    row.status = f"{kind}: {msg}" if msg else kind
    return row


def _eval_star(args):
    return evaluate_point(*args)


def run_sweep(
    cfg: ScenarioConfig,
    axes: Sequence[str],
    archs: Optional[Sequence[str]] = None,
    workers: int = 1,
    timing: bool = False,
) -> SweepResult:
    """Evaluate every point of the axis product; rows come back in point order."""
    archs = SWEEP_ARCHITECTURES if archs is None else tuple(archs)
    points = sweep_points(cfg, axes)
    jobs = [(cfg, p, archs, i, timing) for i, p in enumerate(points)]
    if workers <= 1 or len(jobs) <= 1:
        chunks = [_eval_star(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_eval_star, jobs))
    return SweepResult([r for c in chunks for r in c], len(points))
