import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from wsms.numerics import capacity, capacity_from_singular_values, numerical_rank, svd, water_fill


def bisection_water_fill(r, total, noise, iters=200):
    """Reference solver: bisect the water level until the budget is spent."""
    floors = noise / np.asarray(r, dtype=float) ** 2
    lo, hi = 0.0, floors.min() + total
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(mid - floors, 0).sum() > total:
            hi = mid
        else:
            lo = mid
    level = 0.5 * (lo + hi)
    return np.maximum(level - floors, 0), level


def test_svd_examples():
    u, s, v = svd(np.eye(3))
    assert np.allclose(s, 1.0)
    a = np.array([1.0, 2.0, 2.0])
    b = np.array([3.0, 4.0j])
    _, s, _ = svd(np.outer(a, b.conj()))
    assert s[0] == pytest.approx(3.0 * 5.0)
    assert np.all(s[1:] < 1e-12)
    with pytest.raises(ValueError):
        svd(np.array([[np.nan]]))


def test_svd_unitary_and_reconstructs():
    rng = np.random.default_rng(1)
    h = rng.normal(size=(8, 6)) + 1j * rng.normal(size=(8, 6))
    u, s, v = svd(h)
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-10)
    assert np.allclose(v.conj().T @ v, np.eye(6), atol=1e-10)
    sigma = np.zeros((8, 6))
    np.fill_diagonal(sigma, s)
    assert np.linalg.norm(u @ sigma @ v.conj().T - h) <= 1e-10 * np.linalg.norm(h)
    assert np.all(np.diff(s) <= 0)


def test_water_fill_examples():
    wf = water_fill([1.0], 1.0, 1.0)
    assert wf.allocations == pytest.approx([1.0]) and wf.water_level == pytest.approx(2.0)
    wf = water_fill([1.0, 1.0], 2.0, 1.0)
    assert wf.allocations == pytest.approx([1.0, 1.0])
    wf = water_fill([2.0, 1.0], 3.0, 1.0)
    assert wf.water_level == pytest.approx(2.125, abs=1e-15)
    assert wf.allocations == pytest.approx([1.875, 1.125], abs=1e-15)
    ref, level = bisection_water_fill([2.0, 1.0], 3.0, 1.0)
    assert level == pytest.approx(2.125, abs=1e-12)


def test_water_fill_drops_weak_channels_and_keeps_order():
    wf = water_fill([0.1, 3.0, 0.0, 1.0], 1.0, 1.0)
    assert wf.allocations[0] == 0.0 and wf.allocations[2] == 0.0
    assert wf.active_count == 2
    assert wf.allocations.sum() == pytest.approx(1.0, rel=1e-12)


def test_water_fill_errors():
    with pytest.raises(ValueError):
        water_fill([0.0, 0.0], 1.0, 1.0)
    with pytest.raises(ValueError):
        water_fill([1.0], 0.0, 1.0)


spectra = arrays(np.float64, st.integers(1, 12), elements=st.floats(1e-3, 1e3))


@settings(max_examples=200, deadline=None)
@given(spectra, st.floats(1e-3, 1e4), st.floats(1e-3, 1e2))
def test_water_fill_against_bisection(r, total, noise):
    wf = water_fill(r, total, noise)
    ref, level = bisection_water_fill(r, total, noise)
    scale = max(total, level)
    assert np.allclose(wf.allocations, ref, atol=1e-8 * scale, rtol=0)
    assert wf.allocations.sum() == pytest.approx(total, rel=1e-9)
    # KKT: active exactly where the level clears the floor
    floors = noise / r ** 2
    active = wf.allocations > 0
    assert np.all(wf.water_level > floors[active])
    assert np.all(wf.water_level <= floors[~active] * (1 + 1e-12))
    order = np.argsort(-r, kind="stable")
    assert np.all(np.diff(wf.allocations[order]) <= 1e-12 * scale)


@settings(max_examples=100, deadline=None)
@given(spectra, st.floats(1e-2, 1e3), st.floats(1.0, 10.0))
def test_water_fill_monotone_in_power(r, total, factor):
    a = water_fill(r, total, 1.0).allocations
    b = water_fill(r, total * factor, 1.0).allocations
    assert np.all(b >= a - 1e-9 * total * factor)


def test_capacity_examples():
    assert capacity(np.eye(2), 2.0, 1.0) == pytest.approx(2.0)
    assert capacity(np.zeros((3, 3)), 1.0, 1.0) == 0.0


def test_capacity_matches_log_det():
    rng = np.random.default_rng(7)
    for _ in range(20):
        h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        total, noise = rng.uniform(0.1, 10), rng.uniform(0.1, 2)
        u, s, v = svd(h)
        wf = water_fill(s, total, noise)
        q = v @ np.diag(wf.allocations) @ v.conj().T
        sign, logdet = np.linalg.slogdet(np.eye(4) + h @ q @ h.conj().T / noise)
        assert capacity(h, total, noise) == pytest.approx(logdet / math.log(2), abs=1e-9)


def test_stream_cap_keeps_strongest():
    s = np.array([0.5, 3.0, 1.0])
    assert capacity_from_singular_values(s, 1.0, 1.0, 1) == pytest.approx(math.log2(1 + 9.0))
    full = capacity_from_singular_values(s, 100.0, 1.0)
    assert capacity_from_singular_values(s, 100.0, 1.0, 2) < full


@given(spectra, st.floats(1e-2, 1e3), st.floats(1.0, 3.0), st.integers(0, 11))
def test_capacity_monotone(r, total, factor, idx):
    base = capacity_from_singular_values(r, total, 1.0)
    assert capacity_from_singular_values(r, total * factor, 1.0) >= base - 1e-12
    bumped = r.copy()
    bumped[idx % r.size] *= factor
    assert capacity_from_singular_values(bumped, total, 1.0) >= base - 1e-12


def test_numerical_rank():
    assert numerical_rank(np.eye(5)) == 5
    a = np.arange(1, 5) + 0j
    assert numerical_rank(np.outer(a, a)) == 1
    assert numerical_rank(np.zeros((3, 3))) == 0
    rng = np.random.default_rng(2)
    x = rng.normal(size=(10, 3)) @ rng.normal(size=(3, 10))
    assert numerical_rank(x) == 3
    with pytest.raises(ValueError):
        numerical_rank(x, gap_threshold=1.0)
