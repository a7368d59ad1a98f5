"""Array layouts for widely-spaced multi-subarray terminals.

A terminal with ``n_antennas`` elements is split into ``k`` identical
half-wavelength subarrays.  Subarray reference points (the first element of
each subarray) sit on a ``k_x x k_z`` grid in the x-z plane with pitch
``d_s``.  Transmit arrays live in the plane ``y = 0`` and receive arrays in
the plane ``y = D``; both face each other.

Element ordering is fixed for the whole package: subarray-major, and inside
a subarray row-major in ``(n_L, n_W)`` where ``n_L`` runs along x and
``n_W`` along z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "SPEED_OF_LIGHT",
    "GeometryError",
    "ArrayLayout",
    "wavelength",
    "near_square",
    "feasible_k_set",
    "min_subarray_spacing",
    "max_subarray_spacing",
    "build_layout",
    "reference_positions",
    "element_positions",
    "los_distance_matrix",
    "reflected_distance_matrix",
    "scattered_distance_matrix",
    "reference_distance_los",
    "reference_distance_reflected",
    "aperture",
    "aperture_and_rayleigh",
    "critical_aperture",
]

SPEED_OF_LIGHT = 299_792_458.0

_REL_SLACK = 1e-12


class GeometryError(ValueError):
    """Raised for layouts or link geometries that cannot be realised."""


def wavelength(frequency: float) -> float:
    if frequency <= 0:
        raise GeometryError(f"carrier frequency must be positive, got {frequency}")
    return SPEED_OF_LIGHT / frequency


def near_square(n: int) -> Tuple[int, int]:
    """Split ``n`` into ``(small, large)`` factors with minimal difference."""
    if n < 1:
        raise GeometryError(f"cannot factor {n}")
    small = int(math.isqrt(n))
    while n % small:
        small -= 1
    return small, n // small


@dataclass(frozen=True)
class ArrayLayout:
    """Subarray geometry of one terminal.

    ``ref_indices`` holds the integer grid coordinates ``(x_j, z_j)`` of the
    k reference points; the physical offset of reference ``j`` is
    ``(x_j * d_s, 0, z_j * d_s)`` relative to the array origin.
    """

    n_antennas: int
    k: int
    subarray_rows: int
    subarray_cols: int
    d_a: float
    d_s: float
    ref_indices: Tuple[Tuple[int, int], ...]
    origin_y: float = 0.0

    @property
    def subarray_size(self) -> int:
        return self.subarray_rows * self.subarray_cols

    @property
    def grid_shape(self) -> Tuple[int, int]:
        xs = {x for x, _ in self.ref_indices}
        zs = {z for _, z in self.ref_indices}
        return len(xs), len(zs)

    @property
    def ref_array(self) -> np.ndarray:
        return np.asarray(self.ref_indices, dtype=float).reshape(self.k, 2)

    def with_spacing(self, d_s: float) -> "ArrayLayout":
        """Same layout with a different subarray spacing (re-validated)."""
        return build_layout(self.n_antennas, self.k, d_s, 2.0 * self.d_a, self.origin_y)


def feasible_k_set(n_tx: int, n_rx: int, widen: bool = False) -> Tuple[int, ...]:
    """Subarray counts allowed for an ``n_tx x n_rx`` link.

    ``k`` must divide both antenna counts and satisfy ``k**2 <= min(n_tx,
    n_rx)``.  With ``widen=True`` the square bound is dropped and every
    common divisor is returned.
    """
    if n_tx < 1 or n_rx < 1:
        raise GeometryError("antenna counts must be positive")
    limit = min(n_tx, n_rx)
    out = []
    for k in range(1, limit + 1):
        if n_tx % k or n_rx % k:
            continue
        if not widen and k * k > limit:
            continue
        out.append(k)
    return tuple(out)


def min_subarray_spacing(n_antennas: int, k: int, wavelength: float) -> float:
    """Smallest reference-point pitch at which adjacent subarrays do not overlap."""
    if k < 1 or n_antennas % k:
        raise GeometryError(f"k={k} does not divide {n_antennas} antennas")
    rows, cols = near_square(n_antennas // k)
    return max(rows, cols) * wavelength / 2.0


def max_subarray_spacing(n_antennas: int, k: int, wavelength: float, aperture_cap: float) -> float:
    """Largest pitch whose full-array diagonal stays within ``aperture_cap``.

    Returns ``inf`` for ``k == 1`` where the pitch does not change the
    footprint.
    """
    if k < 1 or n_antennas % k:
        raise GeometryError(f"k={k} does not divide {n_antennas} antennas")
    k_z, k_x = near_square(k)
    rows, cols = near_square(n_antennas // k)
    d_a = wavelength / 2.0
    a, c = k_x - 1, k_z - 1
    b, e = (rows - 1) * d_a, (cols - 1) * d_a
    if a == 0 and c == 0:
        return math.inf
    qa = a * a + c * c
    qb = 2.0 * (a * b + c * e)
    qc = b * b + e * e - aperture_cap * aperture_cap
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        return 0.0
    return (-qb + math.sqrt(disc)) / (2.0 * qa)


def build_layout(
    n_antennas: int,
    k: int,
    d_s: Optional[float],
    wavelength: float,
    origin_y: float = 0.0,
) -> ArrayLayout:
    """Arrange ``n_antennas`` into ``k`` near-square subarrays on a near-square grid.

    The reference grid is ``k_x x k_z`` with ``k_x >= k_z`` and the
    subarrays are ``rows x cols`` with ``rows <= cols``, so the two
    elongations compensate.  ``d_s=None`` selects the no-overlap minimum.
    """
    if n_antennas < 1:
        raise GeometryError("n_antennas must be positive")
    if k < 1 or n_antennas % k:
        raise GeometryError(f"k={k} does not divide {n_antennas} antennas")
    if wavelength <= 0:
        raise GeometryError("wavelength must be positive")
    d_min = min_subarray_spacing(n_antennas, k, wavelength)
    if d_s is None:
        d_s = d_min
    if not math.isfinite(d_s) or d_s < d_min * (1.0 - _REL_SLACK):
        raise GeometryError(
            f"subarray spacing {d_s!r} m is below the overlap minimum {d_min!r} m"
        )
    k_z, k_x = near_square(k)
    rows, cols = near_square(n_antennas // k)
    refs = tuple((x, z) for z in range(k_z) for x in range(k_x))
    return ArrayLayout(
        n_antennas=n_antennas,
        k=k,
        subarray_rows=rows,
        subarray_cols=cols,
        d_a=wavelength / 2.0,
        d_s=float(d_s),
        ref_indices=refs,
        origin_y=origin_y,
    )


def reference_positions(layout: ArrayLayout, y: float, height: float = 0.0) -> np.ndarray:
    """Cartesian ``(k, 3)`` coordinates of the reference points."""
    idx = layout.ref_array
    pos = np.empty((layout.k, 3))
    pos[:, 0] = idx[:, 0] * layout.d_s
    pos[:, 1] = y
    pos[:, 2] = height + idx[:, 1] * layout.d_s
    return pos


def element_positions(layout: ArrayLayout, y: float, height: float = 0.0) -> np.ndarray:
    """Cartesian ``(n_antennas, 3)`` coordinates in the package element order."""
    refs = reference_positions(layout, y, height)
    n_l, n_w = np.meshgrid(
        np.arange(layout.subarray_rows), np.arange(layout.subarray_cols), indexing="ij"
    )
    local = np.zeros((layout.subarray_size, 3))
    local[:, 0] = n_l.ravel() * layout.d_a
    local[:, 2] = n_w.ravel() * layout.d_a
    return (refs[:, None, :] + local[None, :, :]).reshape(-1, 3)


def _check_shared_k(tx: ArrayLayout, rx: ArrayLayout) -> None:
    if tx.k != rx.k:
        raise GeometryError(f"transmit k={tx.k} and receive k={rx.k} differ")


def los_distance_matrix(
    tx: ArrayLayout, rx: ArrayLayout, distance: float, height_offset: float = 0.0
) -> np.ndarray:
    """``(k, k)`` direct-path lengths; entry ``[m, n]`` is rx ref m to tx ref n.

    ``height_offset`` is ``h_r - h_t``; zero gives the parallel, co-planar
    case of aligned terminals.
    """
    _check_shared_k(tx, rx)
    if distance <= 0:
        raise GeometryError(f"link distance must be positive, got {distance}")
    t = reference_positions(tx, 0.0, 0.0)
    r = reference_positions(rx, distance, height_offset)
    return np.linalg.norm(r[:, None, :] - t[None, :, :], axis=-1)


def _check_above_ground(layout: ArrayLayout, height: float, name: str) -> None:
    zs = height + layout.ref_array[:, 1] * layout.d_s
    if height <= 0 or np.any(zs <= 0):
        raise GeometryError(f"{name} array reaches or crosses the ground plane")


def reflected_distance_matrix(
    tx: ArrayLayout, rx: ArrayLayout, distance: float, height_tx: float, height_rx: float
) -> np.ndarray:
    """``(k, k)`` ground-bounce path lengths by the image-source method."""
    _check_shared_k(tx, rx)
    if distance <= 0:
        raise GeometryError(f"link distance must be positive, got {distance}")
    _check_above_ground(tx, height_tx, "transmit")
    _check_above_ground(rx, height_rx, "receive")
    t = reference_positions(tx, 0.0, height_tx)
    r = reference_positions(rx, distance, height_rx)
    r[:, 2] *= -1.0
    return np.linalg.norm(r[:, None, :] - t[None, :, :], axis=-1)


def scattered_distance_matrix(
    tx: ArrayLayout,
    rx: ArrayLayout,
    distance: float,
    height_tx: float,
    height_rx: float,
    point: Sequence[float],
) -> np.ndarray:
    """``(k, k)`` single-bounce lengths off a small flat facet at ``point``.

    The facet normal bisects the rays between the ``(0, 0)`` reference
    points and ``point``, so that pair bounces exactly there; other pairs
    follow the image-source rule about the facet plane.  A point on the
    direct ray leaves the normal undefined and falls back to the
    point-scatterer length ``|t - p| + |p - r|``, which is rank one.
    """
    _check_shared_k(tx, rx)
    if distance <= 0:
        raise GeometryError(f"link distance must be positive, got {distance}")
    p = np.asarray(point, dtype=float)
    t = reference_positions(tx, 0.0, height_tx)
    r = reference_positions(rx, distance, height_rx)
    t0 = np.array([0.0, 0.0, height_tx])
    r0 = np.array([0.0, distance, height_rx])
    u_in = (p - t0) / np.linalg.norm(p - t0)
    u_out = (r0 - p) / np.linalg.norm(r0 - p)
    normal = u_in - u_out
    if np.linalg.norm(normal) < 1e-12:
        d_t = np.linalg.norm(p[None, :] - t, axis=-1)
        d_r = np.linalg.norm(r - p[None, :], axis=-1)
        return d_r[:, None] + d_t[None, :]
    normal /= np.linalg.norm(normal)
    image = t - 2.0 * ((t - p) @ normal)[:, None] * normal[None, :]
    return np.linalg.norm(r[:, None, :] - image[None, :, :], axis=-1)


def _check_index(layout: ArrayLayout, i: int, name: str) -> None:
    if not 0 <= i < layout.k:
        raise IndexError(f"{name} reference index {i} out of range for k={layout.k}")


def reference_distance_los(
    tx: ArrayLayout, rx: ArrayLayout, distance: float, m: int, n: int, height_offset: float = 0.0
) -> float:
    """Direct distance from tx reference ``n`` to rx reference ``m``.

    Each terminal uses its own ``d_s`` for its own indices.
    """
    _check_index(rx, m, "receive")
    _check_index(tx, n, "transmit")
    if distance <= 0:
        raise GeometryError(f"link distance must be positive, got {distance}")
    xm, zm = rx.ref_indices[m]
    xn, zn = tx.ref_indices[n]
    dx = xm * rx.d_s - xn * tx.d_s
    dz = zm * rx.d_s - zn * tx.d_s + height_offset
    return math.sqrt(dx * dx + distance * distance + dz * dz)


def reference_distance_reflected(
    tx: ArrayLayout,
    rx: ArrayLayout,
    distance: float,
    height_tx: float,
    height_rx: float,
    m: int,
    n: int,
) -> float:
    """Ground-reflected distance from tx reference ``n`` to rx reference ``m``."""
    _check_index(rx, m, "receive")
    _check_index(tx, n, "transmit")
    if distance <= 0:
        raise GeometryError(f"link distance must be positive, got {distance}")
    _check_above_ground(tx, height_tx, "transmit")
    _check_above_ground(rx, height_rx, "receive")
    xm, zm = rx.ref_indices[m]
    xn, zn = tx.ref_indices[n]
    dx = xm * rx.d_s - xn * tx.d_s
    dz = height_tx + zn * tx.d_s + height_rx + zm * rx.d_s
    return math.sqrt(dx * dx + distance * distance + dz * dz)


def aperture(layout: ArrayLayout) -> float:
    """Diagonal extent of the full array footprint, outermost element to outermost element."""
    k_x, k_z = layout.grid_shape
    ex = (k_x - 1) * layout.d_s + (layout.subarray_rows - 1) * layout.d_a
    ez = (k_z - 1) * layout.d_s + (layout.subarray_cols - 1) * layout.d_a
    return math.hypot(ex, ez)


def aperture_and_rayleigh(layout: ArrayLayout, wavelength: float) -> Tuple[float, float]:
    """Return ``(S, 2 S**2 / wavelength)``."""
    s = aperture(layout)
    return s, 2.0 * s * s / wavelength


def critical_aperture(wavelength: float, distance: float) -> float:
    """Aperture ``sqrt(wavelength * D / 2)`` above which the Rayleigh distance exceeds D."""
    return math.sqrt(wavelength * distance / 2.0)
