"""Path sets and channel matrices.

Three models share one path description:

* planar-wave channel of a contiguous half-wavelength array,
* spherical-wave LoS-MIMO channel of individually placed antennas,
* the WSMS model, spherical between subarrays and planar inside them,
  ``H = sum_i alpha_i G_i kron (a_ri a_ti^H)``.

Path gains are real amplitudes at the reference path length; the absolute
propagation phase ``exp(j 2 pi L / lambda)`` lives in ``G_i`` (WSMS) or is
applied to the gain (planar), so the two models coincide for ``k = 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .geometry import (
    ArrayLayout,
    GeometryError,
    los_distance_matrix,
    near_square,
    reflected_distance_matrix,
    scattered_distance_matrix,
)

__all__ = [
    "PathKind",
    "Path",
    "PathSet",
    "ChannelMatrix",
    "steering_vector",
    "direction_to_angles",
    "phase_matrix",
    "steering_matrices",
    "core_matrix",
    "wsms_singular_values",
    "assemble_wsms_channel",
    "assemble_planar_channel",
    "assemble_los_mimo_channel",
    "grid_positions",
    "backhaul_paths",
    "path_gains_backhaul",
]


class PathKind(str, enum.Enum):
    LOS = "los"
    GROUND = "ground-reflection"
    SCATTER = "scatter"


@dataclass(frozen=True)
class Path:
    """One propagation path.

    ``aod`` and ``aoa`` are ``(phi, theta)`` pairs in radians.  ``length`` is
    the path length between the two ``(0, 0)`` reference points and
    ``point`` the scatterer location for ``PathKind.SCATTER``.
    """

    gain: complex
    aod: Tuple[float, float]
    aoa: Tuple[float, float]
    kind: PathKind
    length: float = 0.0
    point: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if not np.isfinite(self.gain) or self.gain == 0:
            raise ValueError(f"path gain must be finite and nonzero, got {self.gain}")
        for phi, theta in (self.aod, self.aoa):
            if not (0.0 < phi < math.pi and 0.0 < theta < math.pi):
                raise ValueError(f"angles must lie in (0, pi), got phi={phi}, theta={theta}")
        if self.kind is PathKind.SCATTER and self.point is None:
            raise ValueError("scatter paths need a scatterer point")


@dataclass(frozen=True)
class PathSet:
    """Paths of one link plus the link geometry they were traced in."""

    paths: Tuple[Path, ...]
    distance: float
    height_tx: float = 30.0
    height_rx: float = 30.0

    def __post_init__(self):
        if not self.paths:
            raise ValueError("a path set needs at least one path")
        if any(p.kind is PathKind.LOS for p in self.paths[1:]):
            raise ValueError("the LoS path, when present, must come first")

    def __len__(self) -> int:
        return len(self.paths)

    def __iter__(self):
        return iter(self.paths)

    def __getitem__(self, i):
        return self.paths[i]

    @property
    def has_los(self) -> bool:
        return self.paths[0].kind is PathKind.LOS

    def subset(self, indices: Sequence[int]) -> "PathSet":
        return PathSet(
            tuple(self.paths[i] for i in indices), self.distance, self.height_tx, self.height_rx
        )


@dataclass(frozen=True)
class ChannelMatrix:
    entries: np.ndarray
    model: str
    tx: Optional[ArrayLayout] = None
    rx: Optional[ArrayLayout] = None
    paths: Optional[PathSet] = None
    split: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape

    @property
    def los(self) -> np.ndarray:
        if self.split is None:
            raise ValueError("channel carries no LoS/NLoS split")
        return self.split[0]

    @property
    def nlos(self) -> np.ndarray:
        if self.split is None:
            raise ValueError("channel carries no LoS/NLoS split")
        return self.split[1]


def steering_vector(rows: int, cols: int, d_a: float, wavelength: float, phi: float, theta: float) -> np.ndarray:
    """Unit-modulus response of a ``rows x cols`` planar array in the x-z plane.

    Element ``(n_L, n_W)`` sits at index ``n_L * cols + n_W`` and carries
    ``exp(j 2 pi / lambda * d_a * (n_L sin(theta) cos(phi) + n_W cos(theta)))``.
    """
    if rows < 1 or cols < 1:
        raise ValueError("array dimensions must be positive")
    k0 = 2.0 * math.pi / wavelength
    n_l = np.arange(rows)[:, None]
    n_w = np.arange(cols)[None, :]
    phase = k0 * d_a * (n_l * math.sin(theta) * math.cos(phi) + n_w * math.cos(theta))
    return np.exp(1j * phase).ravel()


def direction_to_angles(u: Sequence[float]) -> Tuple[float, float]:
    """``(phi, theta)`` of the propagation direction ``u`` (azimuth from x, polar from z)."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    theta = math.acos(float(np.clip(u[2], -1.0, 1.0)))
    phi = math.atan2(float(u[1]), float(u[0]))
    return phi, theta


def _distance_matrix(path: Path, tx: ArrayLayout, rx: ArrayLayout, distance: float, height_tx: float, height_rx: float) -> np.ndarray:
    if path.kind is PathKind.LOS:
        return los_distance_matrix(tx, rx, distance, height_rx - height_tx)
    if path.kind is PathKind.GROUND:
        return reflected_distance_matrix(tx, rx, distance, height_tx, height_rx)
    return scattered_distance_matrix(tx, rx, distance, height_tx, height_rx, path.point)


def phase_matrix(
    tx: ArrayLayout,
    rx: ArrayLayout,
    path: Path,
    distance: float,
    height_tx: float,
    height_rx: float,
    wavelength: float,
) -> np.ndarray:
    """``k x k`` inter-subarray phase matrix ``G[m, n] = exp(j 2 pi D_mn / lambda)``."""
    d = _distance_matrix(path, tx, rx, distance, height_tx, height_rx)
    return np.exp(1j * (2.0 * math.pi / wavelength) * d)


def steering_matrices(paths: PathSet, tx: ArrayLayout, rx: ArrayLayout, wavelength: float) -> Tuple[np.ndarray, np.ndarray]:
    """Per-subarray response matrices ``(A_t, A_r)``, one column per path."""
    a_t = np.column_stack(
        [steering_vector(tx.subarray_rows, tx.subarray_cols, tx.d_a, wavelength, *p.aod) for p in paths]
    )
    a_r = np.column_stack(
        [steering_vector(rx.subarray_rows, rx.subarray_cols, rx.d_a, wavelength, *p.aoa) for p in paths]
    )
    return a_t, a_r


def core_matrix(paths: PathSet, tx: ArrayLayout, rx: ArrayLayout, wavelength: float) -> np.ndarray:
    """``k N_p x k N_p`` matrix with diagonal blocks ``diag(alpha_i G_i[m, n])``.

    Row ``m * N_p + i`` pairs receive subarray ``m`` with path ``i``, so that
    ``H = (I_k kron A_r) @ M @ (I_k kron A_t)^H``.
    """
    if tx.k != rx.k:
        raise GeometryError("transmit and receive layouts must share k")
    k, n_p = tx.k, len(paths)
    m = np.zeros((k * n_p, k * n_p), dtype=complex)
    for i, p in enumerate(paths):
        g = phase_matrix(tx, rx, p, paths.distance, paths.height_tx, paths.height_rx, wavelength)
        m[i::n_p, i::n_p] = p.gain * g
    return m


def wsms_singular_values(paths: PathSet, tx: ArrayLayout, rx: ArrayLayout, wavelength: float) -> np.ndarray:
    """Nonzero singular values of the WSMS channel without forming it.

    Thin QR of the per-subarray response matrices reduces the problem to a
    ``k N_p``-sized core, so the cost grows linearly with the antenna count.
    """
    a_t, a_r = steering_matrices(paths, tx, rx, wavelength)
    r_t = np.linalg.qr(a_t, mode="r")
    r_r = np.linalg.qr(a_r, mode="r")
    k = tx.k
    core = np.kron(np.eye(k), r_r) @ core_matrix(paths, tx, rx, wavelength) @ np.kron(np.eye(k), r_t).conj().T
    return np.linalg.svd(core, compute_uv=False)


def assemble_wsms_channel(paths: PathSet, tx: ArrayLayout, rx: ArrayLayout, wavelength: float) -> ChannelMatrix:
    """Dense WSMS channel with the first (LoS) term split out when present."""
    if tx.k != rx.k:
        raise GeometryError("transmit and receive layouts must share k")
    a_t, a_r = steering_matrices(paths, tx, rx, wavelength)
    terms = []
    for i, p in enumerate(paths):
        g = phase_matrix(tx, rx, p, paths.distance, paths.height_tx, paths.height_rx, wavelength)
        terms.append(p.gain * np.kron(g, np.outer(a_r[:, i], a_t[:, i].conj())))
    h = np.sum(terms, axis=0)
    split = None
    if paths.has_los:
        h_los = terms[0]
        split = (h_los, h - h_los)
    return ChannelMatrix(h, "wsms", tx, rx, paths, split)


def assemble_planar_channel(
    paths: PathSet,
    n_tx: int,
    n_rx: int,
    wavelength: float,
    shapes: Optional[Tuple[Tuple[int, int], Tuple[int, int]]] = None,
) -> ChannelMatrix:
    """Planar-wave channel of contiguous half-wavelength arrays.

    Each path contributes ``alpha_i exp(j 2 pi L_i / lambda) a_ri a_ti^H``.
    ``shapes`` gives ``((rows_t, cols_t), (rows_r, cols_r))`` and defaults to
    the near-square factorisations.
    """
    if shapes is None:
        shapes = (near_square(n_tx), near_square(n_rx))
    (rt, ct), (rr, cr) = shapes
    if rt * ct != n_tx or rr * cr != n_rx:
        raise ValueError("array shapes do not match antenna counts")
    d_a = wavelength / 2.0
    k0 = 2.0 * math.pi / wavelength
    h = np.zeros((n_rx, n_tx), dtype=complex)
    split = None
    for i, p in enumerate(paths):
        a_t = steering_vector(rt, ct, d_a, wavelength, *p.aod)
        a_r = steering_vector(rr, cr, d_a, wavelength, *p.aoa)
        term = p.gain * np.exp(1j * k0 * p.length) * np.outer(a_r, a_t.conj())
        if i == 0 and paths.has_los:
            split = term
        h += term
    if split is not None:
        split = (split, h - split)
    return ChannelMatrix(h, "planar", None, None, paths, split)


def grid_positions(n: int, spacing: float, y: float, height: float = 0.0) -> np.ndarray:
    """Positions of an ``n``-element near-square grid in the plane ``y``, rows along x."""
    rows, cols = near_square(n)
    n_l, n_w = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    pos = np.zeros((n, 3))
    pos[:, 0] = n_l.ravel() * spacing
    pos[:, 1] = y
    pos[:, 2] = height + n_w.ravel() * spacing
    return pos


def assemble_los_mimo_channel(gain: complex, tx_positions, rx_positions, wavelength: float) -> ChannelMatrix:
    """Spherical-wave LoS channel ``|alpha| exp(j 2 pi D_mn / lambda)`` over exact antenna distances."""
    t = np.asarray(tx_positions, dtype=float)
    r = np.asarray(rx_positions, dtype=float)
    d = np.linalg.norm(r[:, None, :] - t[None, :, :], axis=-1)
    h = abs(gain) * np.exp(1j * (2.0 * math.pi / wavelength) * d)
    return ChannelMatrix(h, "los-mimo")


def _friis(wavelength: float, length: float, absorption: float) -> float:
    if length <= 0:
        raise GeometryError(f"path length must be positive, got {length}")
    return wavelength / (4.0 * math.pi * length) * math.exp(-0.5 * absorption * length)


def backhaul_paths(
    wavelength: float,
    distance: float,
    height_tx: float = 30.0,
    height_rx: float = 30.0,
    reflection_loss_db: float = 10.0,
    absorption: float = 0.0,
    include_reflection: bool = True,
    scatterers: Sequence[Tuple[float, float, float]] = (),
    scatter_loss_db: float = 15.0,
) -> PathSet:
    """LoS, ground bounce and optional single-bounce scatterers for two facing masts.

    Amplitudes follow free-space spreading ``lambda / (4 pi L)`` with an
    optional molecular-absorption factor ``exp(-absorption * L / 2)``.  The
    ground bounce carries a negative reflection coefficient of
    ``reflection_loss_db`` power loss.  Angles are those of the rays
    between the ``(0, 0)`` reference points; for bounced rays the receive
    angle is taken in the mirrored frame so that the planar expansion
    matches the image geometry.
    """
    if distance <= 0:
        raise GeometryError(f"link distance must be positive, got {distance}")
    if height_tx <= 0 or height_rx <= 0:
        raise GeometryError("mounting heights must be positive")
    t0 = np.array([0.0, 0.0, height_tx])
    r0 = np.array([0.0, distance, height_rx])

    paths = []
    u = r0 - t0
    los_len = float(np.linalg.norm(u))
    ang = direction_to_angles(u)
    paths.append(Path(_friis(wavelength, los_len, absorption), ang, ang, PathKind.LOS, los_len))

    if include_reflection:
        image = r0 * np.array([1.0, 1.0, -1.0])
        u = image - t0
        refl_len = float(np.linalg.norm(u))
        coeff = -math.sqrt(10.0 ** (-reflection_loss_db / 10.0))
        aod = direction_to_angles(u)
        aoa = direction_to_angles(u * np.array([1.0, 1.0, -1.0]))
        paths.append(
            Path(coeff * _friis(wavelength, refl_len, absorption), aod, aoa, PathKind.GROUND, refl_len)
        )

    s_coeff = math.sqrt(10.0 ** (-scatter_loss_db / 10.0))
    for pt in scatterers:
        p = np.asarray(pt, dtype=float)
        d1, d2 = p - t0, r0 - p
        length = float(np.linalg.norm(d1) + np.linalg.norm(d2))
        paths.append(
            Path(
                s_coeff * _friis(wavelength, length, absorption),
                direction_to_angles(d1),
                direction_to_angles(d2),
                PathKind.SCATTER,
                length,
                tuple(float(c) for c in p),
            )
        )
    return PathSet(tuple(paths), distance, height_tx, height_rx)


def path_gains_backhaul(scenario, distance: Optional[float] = None) -> PathSet:
    """Backhaul path set for a :class:`wsms.config.ScenarioConfig`."""
    return backhaul_paths(
        scenario.wavelength,
        scenario.distance if distance is None else distance,
        scenario.height_tx,
        scenario.height_rx,
        scenario.reflection_loss_db,
        scenario.absorption,
        scenario.include_reflection,
        scenario.scatterer_points(distance),
        scenario.scatter_loss_db,
    )
