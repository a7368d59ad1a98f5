import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wsms.geometry import (
    GeometryError,
    aperture_and_rayleigh,
    build_layout,
    critical_aperture,
    element_positions,
    feasible_k_set,
    los_distance_matrix,
    max_subarray_spacing,
    min_subarray_spacing,
    near_square,
    reference_distance_los,
    reference_distance_reflected,
    reference_positions,
    reflected_distance_matrix,
    wavelength,
)

LAM = 1e-3


def test_wavelength_at_300ghz():
    assert wavelength(3e11) == pytest.approx(299792458.0 / 3e11, rel=1e-15)
    with pytest.raises(GeometryError):
        wavelength(0.0)


@pytest.mark.parametrize("n, expected", [((16, 16), (1, 2, 4)), ((1, 1), (1,)), ((1024, 1024), (1, 2, 4, 8, 16, 32))])
def test_feasible_k_examples(n, expected):
    assert feasible_k_set(*n) == expected


@given(st.integers(1, 300), st.integers(1, 300))
def test_feasible_k_matches_brute_force(nt, nr):
    brute = tuple(k for k in range(1, min(nt, nr) + 1) if nt % k == 0 and nr % k == 0 and k * k <= min(nt, nr))
    assert feasible_k_set(nt, nr) == brute


def test_widened_k_set_keeps_every_common_divisor():
    assert feasible_k_set(1024, 1024, widen=True) == tuple(2 ** i for i in range(11))


def test_layout_16_4():
    lay = build_layout(16, 4, 0.1, LAM, 0.0)
    assert (lay.subarray_rows, lay.subarray_cols) == (2, 2)
    assert set(lay.ref_indices) == {(0, 0), (1, 0), (0, 1), (1, 1)}
    assert lay.d_a == LAM / 2


def test_layout_k1_single_subarray():
    lay = build_layout(16, 1, None, LAM)
    assert lay.ref_indices == ((0, 0),)
    assert (lay.subarray_rows, lay.subarray_cols) == (4, 4)


def test_layout_64_8():
    lay = build_layout(64, 8, 0.2, LAM, 60.0)
    assert lay.grid_shape == (4, 2)
    assert (lay.subarray_rows, lay.subarray_cols) == (2, 4)
    assert len(set(lay.ref_indices)) == 8
    pos = reference_positions(lay, 60.0)
    d = np.linalg.norm(pos[:, None] - pos[None], axis=-1)
    off = d[~np.eye(8, dtype=bool)]
    assert off.min() == pytest.approx(0.2, rel=1e-12)


def test_layout_rejects_bad_inputs():
    with pytest.raises(GeometryError):
        build_layout(16, 3, 0.1, LAM)
    with pytest.raises(GeometryError):
        build_layout(16, 4, 0.5 * LAM, LAM)  # subarrays would overlap


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([16, 36, 64, 144, 256]), st.data())
def test_layout_invariants(n, data):
    k = data.draw(st.sampled_from(feasible_k_set(n, n)))
    lo = min_subarray_spacing(n, k, LAM)
    d_s = lo * data.draw(st.floats(1.0, 50.0))
    lay = build_layout(n, k, d_s, LAM)
    assert lay.subarray_size * k == n
    assert lay.d_s >= max(lay.subarray_rows, lay.subarray_cols) * lay.d_a * (1 - 1e-12)
    assert len(set(lay.ref_indices)) == k
    k_x, k_z = lay.grid_shape
    assert k_x * k_z == k and k_x >= k_z
    # grid-adjacent references are exactly d_s apart
    refs = {r: i for i, r in enumerate(lay.ref_indices)}
    pos = reference_positions(lay, 0.0)
    for (x, z), i in refs.items():
        for nb in ((x + 1, z), (x, z + 1)):
            if nb in refs:
                assert np.linalg.norm(pos[i] - pos[refs[nb]]) == pytest.approx(d_s, rel=1e-12)
    # subarrays never overlap: every element pair is at least d_a apart
    el = element_positions(lay, 0.0)
    gaps = np.linalg.norm(el[:, None] - el[None], axis=-1)[np.triu_indices(n, 1)]
    assert gaps.min() >= lay.d_a * (1 - 1e-9)


def test_los_distance_hand_values():
    tx = build_layout(4, 2, 0.1, LAM)
    rx = build_layout(4, 2, 0.1, LAM, 40.0)
    # refs are (0,0),(1,0): offset 1 along x
    assert reference_distance_los(tx, rx, 40.0, 1, 0) == pytest.approx(40.000125, abs=5e-7)
    assert reference_distance_los(tx, rx, 40.0, 0, 0) == 40.0
    exact = math.sqrt(0.01 + 1600)
    assert reference_distance_los(tx, rx, 40.0, 1, 0) == pytest.approx(exact, rel=1e-15)


def test_los_distance_3_4_offset():
    # rx ref (4, 4) against tx ref (1, 0): offsets (3, 4)
    tx = build_layout(16 * 25, 25, 0.1, LAM)
    rx = build_layout(16 * 25, 25, 0.1, LAM, 50.0)
    m = rx.ref_indices.index((4, 4))
    n = tx.ref_indices.index((1, 0))
    assert reference_distance_los(tx, rx, 50.0, m, n) == pytest.approx(math.sqrt(0.09 + 2500 + 0.16), rel=1e-15)
    assert math.sqrt(0.09 + 2500 + 0.16) == pytest.approx(50.0025, abs=1e-6)


def test_los_distance_uses_each_terminal_spacing():
    tx = build_layout(4, 2, 0.1, LAM)
    rx = build_layout(4, 2, 0.3, LAM, 10.0)
    assert reference_distance_los(tx, rx, 10.0, 1, 1) == pytest.approx(math.sqrt(0.2 ** 2 + 100), rel=1e-15)


def test_distance_index_errors():
    tx = build_layout(4, 2, 0.1, LAM)
    rx = build_layout(4, 2, 0.1, LAM, 10.0)
    with pytest.raises(IndexError):
        reference_distance_los(tx, rx, 10.0, 2, 0)
    with pytest.raises(IndexError):
        reference_distance_reflected(tx, rx, 10.0, 30, 30, 0, -1)


def test_reflected_distance_image_method():
    tx = build_layout(16, 4, 0.1, LAM)
    rx = build_layout(16, 4, 0.1, LAM, 50.0)
    assert reference_distance_reflected(tx, rx, 50.0, 30, 30, 0, 0) == pytest.approx(math.sqrt(6100), rel=1e-15)
    assert math.sqrt(6100) == pytest.approx(78.1025, abs=5e-5)
    with pytest.raises(GeometryError):
        reference_distance_reflected(tx, rx, 50.0, -0.05, 30, 0, 0)


def test_distance_matrices_agree_with_scalar_forms():
    tx = build_layout(64, 8, 0.07, LAM)
    rx = build_layout(64, 8, 0.07, LAM, 60.0)
    los = los_distance_matrix(tx, rx, 60.0)
    refl = reflected_distance_matrix(tx, rx, 60.0, 30.0, 25.0)
    for m in range(8):
        for n in range(8):
            assert los[m, n] == pytest.approx(reference_distance_los(tx, rx, 60.0, m, n), rel=1e-15)
            assert refl[m, n] == pytest.approx(reference_distance_reflected(tx, rx, 60.0, 30.0, 25.0, m, n), rel=1e-15)
    assert np.all(refl > los)
    assert np.all(los >= 60.0)
    assert np.all((los == 60.0) == np.eye(8, dtype=bool))


@given(st.floats(0.01, 0.5), st.floats(5.0, 500.0), st.integers(0, 3), st.integers(0, 3))
def test_reflected_symmetric_swap(d_s, dist, m, n):
    tx = build_layout(16, 4, d_s, LAM)
    rx = build_layout(16, 4, d_s, LAM, dist)
    a = reference_distance_reflected(tx, rx, dist, 30, 30, m, n)
    b = reference_distance_reflected(tx, rx, dist, 30, 30, n, m)
    assert a == pytest.approx(b, rel=1e-14)
    assert a > reference_distance_los(tx, rx, dist, m, n)


def test_aperture_constants():
    s = critical_aperture(1e-3, 40.0)
    assert s == pytest.approx(0.1414, abs=5e-5)
    assert 2 * s * s / 1e-3 == pytest.approx(40.0, rel=1e-12)
    single = build_layout(1, 1, None, LAM)
    assert aperture_and_rayleigh(single, LAM) == (0.0, 0.0)


def test_aperture_of_contiguous_array():
    lay = build_layout(16, 1, None, LAM)
    s, d_ray = aperture_and_rayleigh(lay, LAM)
    assert s == pytest.approx(math.hypot(3, 3) * LAM / 2)
    assert d_ray == pytest.approx(2 * s * s / LAM)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([16, 64, 256]), st.data(), st.floats(0.05, 2.0))
def test_max_spacing_hits_aperture_cap(n, data, cap):
    k = data.draw(st.sampled_from([k for k in feasible_k_set(n, n) if k > 1]))
    hi = max_subarray_spacing(n, k, LAM, cap)
    lo = min_subarray_spacing(n, k, LAM)
    if hi >= lo:
        s, _ = aperture_and_rayleigh(build_layout(n, k, hi, LAM), LAM)
        assert s == pytest.approx(cap, rel=1e-9)
    assert max_subarray_spacing(n, 1, LAM, cap) == math.inf


def test_near_square():
    assert near_square(12) == (3, 4)
    assert near_square(7) == (1, 7)
    assert near_square(64) == (8, 8)
    assert Fraction(*near_square(32)) == Fraction(4, 8)


def test_facet_bounce_geometry():
    from wsms.geometry import scattered_distance_matrix

    lam = 1e-3
    tx = build_layout(64, 4, 0.2, lam)
    rx = build_layout(64, 4, 0.2, lam, 60.0)
    p = np.array([5.0, 25.0, 12.0])
    d = scattered_distance_matrix(tx, rx, 60.0, 30.0, 30.0, p)
    t0, r0 = np.array([0.0, 0.0, 30.0]), np.array([0.0, 60.0, 30.0])
    # the reference pair bounces at the given point
    assert d[0, 0] == pytest.approx(np.linalg.norm(p - t0) + np.linalg.norm(r0 - p), rel=1e-14)
    # no bounce is shorter than the direct ray
    assert np.all(d > los_distance_matrix(tx, rx, 60.0))
    g = np.exp(2j * np.pi / lam * d)
    assert np.linalg.matrix_rank(g, tol=1e-6 * np.linalg.norm(g)) == 4
    # a point on the direct ray has no defined facet; the length separates
    on_ray = scattered_distance_matrix(tx, rx, 60.0, 30.0, 30.0, (0.0, 30.0, 30.0))
    g = np.exp(2j * np.pi / lam * on_ray)
    assert np.linalg.matrix_rank(g, tol=1e-9 * np.linalg.norm(g)) == 1
