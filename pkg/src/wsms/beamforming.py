"""Closed-form hybrid beamforming for WSMS links.

The channel factors as ``H = B (I_k kron A_t)^H = (I_k kron A_r) D`` with
``B = (I_k kron A_r) M`` and ``D = M (I_k kron A_t)^H`` (``M`` being the
block matrix of ``diag(alpha_i G_i[m, n])``).  Right singular vectors
therefore lie in the column space of ``I_k kron A_t`` and left ones in that
of ``I_k kron A_r``; taking those Kronecker products as the analog stages
and the coordinates ``T = B^H U Sigma^-1``, ``R = D V Sigma^-1`` as the
digital stages reproduces the fully-digital optimum exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import linalg as sla

from .channel import PathSet, core_matrix, steering_matrices
from .geometry import ArrayLayout, GeometryError
from .numerics import water_fill

__all__ = [
    "DegenerateChannelError",
    "BeamformerSet",
    "Violation",
    "closed_form_wsms",
    "evaluate_se",
    "validate_constraints",
]

_DEGENERACY = 1e-12


class DegenerateChannelError(np.linalg.LinAlgError):
    """The channel lacks the rank needed for the requested streams."""


@dataclass(frozen=True)
class BeamformerSet:
    P_A: np.ndarray
    P_D: np.ndarray
    C_A: np.ndarray
    C_D: np.ndarray
    k: int
    l_t: int
    l_r: int
    n_streams: int

    @property
    def precoder(self) -> np.ndarray:
        return self.P_A @ self.P_D

    @property
    def combiner(self) -> np.ndarray:
        return self.C_A @ self.C_D


@dataclass(frozen=True)
class Violation:
    kind: str  # "block-support" | "unit-modulus" | "power" | "shape"
    matrix: str
    measured: float
    detail: str = ""


def _block_kron(k: int, a: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(k), a)


def _apply_block(k: int, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(I_k kron a) @ x`` without forming the Kronecker product."""
    n = a.shape[1]
    return np.concatenate([a @ x[j * n:(j + 1) * n] for j in range(k)], axis=0)


def _apply_block_h(k: int, a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``(I_k kron a)^H @ x``."""
    n = a.shape[0]
    ah = a.conj().T
    return np.concatenate([ah @ x[j * n:(j + 1) * n] for j in range(k)], axis=0)


def closed_form_wsms(
    paths: PathSet,
    tx: ArrayLayout,
    rx: ArrayLayout,
    total_power: float,
    noise_power: float,
    wavelength: float,
    n_streams: int | None = None,
) -> BeamformerSet:
    """Optimal hybrid precoder/combiner with ``L_t = L_r = k N_p`` RF chains.

    Never forms the ``N_r x N_t`` channel: the leading singular triplets come
    from thin QRs of the per-subarray response matrices and an SVD of the
    ``k N_p``-sized core, so the cost is ``O((N_t + N_r) N_s^2)`` for fixed
    ``k N_p``.
    """
    if tx.k != rx.k:
        raise GeometryError("transmit and receive layouts must share k")
    k, n_p = tx.k, len(paths)
    n_rf = k * n_p
    n_s = n_rf if n_streams is None else n_streams
    if n_p > tx.subarray_size or n_p > rx.subarray_size:
        raise DegenerateChannelError(
            f"k*N_p={n_rf} exceeds the antenna count (N_t={tx.n_antennas}, N_r={rx.n_antennas})"
        )
    if not 1 <= n_s <= n_rf:
        raise ValueError(f"stream count {n_s} must lie in [1, {n_rf}]")

    a_t, a_r = steering_matrices(paths, tx, rx, wavelength)
    m = core_matrix(paths, tx, rx, wavelength)

    q_t, r_t = np.linalg.qr(a_t)
    q_r, r_r = np.linalg.qr(a_r)
    core = _block_kron(k, r_r) @ m @ _block_kron(k, r_t).conj().T
    w, s, zh = np.linalg.svd(core)
    if s[n_s - 1] <= _DEGENERACY * s[0]:
        raise DegenerateChannelError(
            f"singular value {n_s} is {s[n_s - 1]:.3e} against {s[0]:.3e}; paths or subarrays coincide"
        )
    u_ns = _apply_block(k, q_r, w[:, :n_s])
    v_ns = _apply_block(k, q_t, zh.conj().T[:, :n_s])
    s_ns = s[:n_s]

    # B^H U and D V for the digital stages
    t_ns = (m.conj().T @ _apply_block_h(k, a_r, u_ns)) / s_ns
    r_ns = (m @ _apply_block_h(k, a_t, v_ns)) / s_ns

    wf = water_fill(s_ns, total_power, noise_power)
    gamma = np.sqrt(wf.allocations * n_s / total_power)
    p_d = t_ns * gamma

    norm = np.linalg.norm(_apply_block(k, a_t, p_d))
    p_d = p_d * (np.sqrt(n_s) / norm)

    return BeamformerSet(
        P_A=_block_kron(k, a_t),
        P_D=p_d,
        C_A=_block_kron(k, a_r),
        C_D=r_ns,
        k=k,
        l_t=n_p,
        l_r=n_p,
        n_streams=n_s,
    )


def evaluate_se(h, bf: BeamformerSet, total_power: float, noise_power: float) -> float:
    """Achievable spectral efficiency of a hybrid transceiver, bits/s/Hz.

    The post-combining noise covariance is whitened with a Cholesky factor
    instead of being inverted.
    """
    h = np.asarray(getattr(h, "entries", h))
    if h.shape != (bf.C_A.shape[0], bf.P_A.shape[0]):
        raise ValueError(f"channel shape {h.shape} does not match the beamformers")
    comb = bf.C_A @ bf.C_D
    h_eff = comb.conj().T @ (h @ (bf.P_A @ bf.P_D))
    r_n = noise_power * (comb.conj().T @ comb)
    try:
        chol = sla.cholesky(r_n, lower=True)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("post-combining noise covariance is singular") from exc
    whitened = sla.solve_triangular(chol, h_eff, lower=True)
    gram = (total_power / bf.n_streams) * (whitened @ whitened.conj().T)
    eig = np.linalg.eigvalsh(gram)
    return float(np.sum(np.log2(1.0 + np.clip(eig, 0.0, None))))


def validate_constraints(
    bf: BeamformerSet, modulus_tol: float = 1e-12, power_tol: float = 1e-9
) -> List[Violation]:
    """Check block support, unit modulus and the precoder power budget.

    An empty list means the set is feasible.  Off-block entries must be
    exactly zero.
    """
    out: List[Violation] = []
    for name, a, per_block in (("P_A", bf.P_A, bf.l_t), ("C_A", bf.C_A, bf.l_r)):
        n, cols = a.shape
        if n % bf.k or cols != bf.k * per_block:
            out.append(Violation("shape", name, float(cols), f"{a.shape} incompatible with k={bf.k}"))
            continue
        rows = n // bf.k
        mask = np.kron(np.eye(bf.k, dtype=bool), np.ones((rows, per_block), dtype=bool))
        off = np.abs(a[~mask])
        if np.any(off != 0):
            out.append(
                Violation("block-support", name, float(off.max()), f"{int(np.count_nonzero(off))} off-block entries nonzero")
            )
        dev = np.abs(np.abs(a[mask]) - 1.0)
        if dev.size and dev.max() > modulus_tol:
            out.append(Violation("unit-modulus", name, float(dev.max()), "max | |a| - 1 |"))
    if bf.P_A.shape[1] != bf.P_D.shape[0]:
        out.append(Violation("shape", "P_D", float(bf.P_D.shape[0]), f"P_D has {bf.P_D.shape[0]} rows for {bf.P_A.shape[1]} RF chains"))
        return out
    power = float(np.linalg.norm(bf.P_A @ bf.P_D) ** 2)
    if abs(power - bf.n_streams) > power_tol * bf.n_streams:
        out.append(Violation("power", "P_A P_D", power, f"||P_A P_D||_F^2 should be {bf.n_streams}"))
    return out
