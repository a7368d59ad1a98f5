from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wsms.power import ARCHITECTURES, PowerModel, energy_efficiency, link_power, power_consumption

TABLE = dict(p_pa=40.0, p_pc=6.6, p_ps=42.0, p_rf=26.0, p_dac=110.0, p_bb=200.0)


def test_device_defaults():
    m = PowerModel()
    for name, v in TABLE.items():
        assert getattr(m, name) == v


def test_wsms_example_exact():
    exact = Fraction(40) * 64 + Fraction("6.6") * 64 + Fraction(42) * 128 + Fraction(26) * 8 + Fraction(110) * 8 + 200
    assert exact == Fraction("9646.4")
    assert PowerModel().consumption_mw("wsms", 64, 8, 4) == pytest.approx(9646.4, abs=1e-9)
    assert power_consumption("wsms", 64, 8, 4) == pytest.approx(9.6464, abs=1e-12)


def test_baseband_only():
    for arch in ARCHITECTURES:
        assert PowerModel().consumption_mw(arch, 0, 0, 1) == 200.0


def test_device_counts_per_architecture():
    m = PowerModel()
    assert m.device_counts("wsms", 64, 8, 4) == dict(pa=64, pc=64, ps=128, rf=8, dac=8, bb=1)
    assert m.device_counts("fc", 64, 8) == dict(pa=64, pc=64, ps=512, rf=8, dac=8, bb=1)
    assert m.device_counts("aosa", 64, 8) == dict(pa=64, pc=0, ps=64, rf=8, dac=8, bb=1)
    assert m.device_counts("digital", 64, 0) == dict(pa=64, pc=0, ps=0, rf=64, dac=64, bb=1)


@given(st.integers(1, 512), st.integers(1, 32), st.integers(2, 16))
def test_fc_exceeds_wsms_for_k_above_one(n, l, k):
    if (n * l) % k:
        with pytest.raises(ValueError):
            power_consumption("wsms", n, l, k)
        return
    assert power_consumption("fc", n, l) > power_consumption("wsms", n, l, k)


@given(st.sampled_from(ARCHITECTURES), st.integers(0, 200), st.integers(0, 16))
def test_affine_in_antennas(arch, n, l):
    p = [power_consumption(arch, n + j, l, 1) for j in range(3)]
    assert p[2] - p[1] == pytest.approx(p[1] - p[0], abs=1e-9)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        power_consumption("hybrid", 4, 2)
    with pytest.raises(ValueError):
        power_consumption("wsms", -1, 2)
    with pytest.raises(ValueError):
        power_consumption("wsms", 4, 2, 0)
    with pytest.raises(ValueError):
        PowerModel(p_pa=0.0)


def test_overridable_receiver_model():
    rx = PowerModel(p_pa=10.0)
    a = link_power("wsms", 64, 64, 8, 8, 0.01, 4)
    b = link_power("wsms", 64, 64, 8, 8, 0.01, 4, rx_model=rx)
    assert a - b == pytest.approx(64 * 30.0 / 1000)
    assert a == pytest.approx(2 * 9.6464 + 0.01)


def test_energy_efficiency():
    assert energy_efficiency(0.0, 5e9, 10.0) == 0.0
    assert energy_efficiency(4.0, 5e9, 20.0) == pytest.approx(energy_efficiency(4.0, 5e9, 10.0) / 2)
    assert energy_efficiency(2.0, 5e9, 10.0) == pytest.approx(1e9)
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            energy_efficiency(1.0, 5e9, bad)
