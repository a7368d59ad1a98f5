"""Hardware power consumption and energy efficiency of hybrid transceivers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict

__all__ = ["ARCHITECTURES", "PowerModel", "power_consumption", "energy_efficiency", "link_power"]

ARCHITECTURES = ("wsms", "fc", "aosa", "digital")


@dataclass(frozen=True)
class PowerModel:
    """Per-device power draw in mW near 0.3 THz."""

    p_pa: float = 40.0
    p_pc: float = 6.6
    p_ps: float = 42.0
    p_rf: float = 26.0
    p_dac: float = 110.0
    p_bb: float = 200.0

    def __post_init__(self):
        for name, v in vars(self).items():
            if not v > 0:
                raise ValueError(f"{name} must be positive, got {v}")

    def device_counts(self, arch: str, n: int, l: int, k: int = 1) -> Dict[str, int]:
        """Device quantities for one terminal with ``n`` antennas and ``l`` RF chains."""
        arch = arch.lower()
        if n < 0 or l < 0 or k < 1:
            raise ValueError("antenna and RF-chain counts must be nonnegative and k positive")
        if arch == "wsms":
            if (n * l) % k:
                raise ValueError(f"N*L={n * l} is not divisible by k={k}")
            return dict(pa=n, pc=n, ps=n * l // k, rf=l, dac=l, bb=1)
        if arch == "fc":
            return dict(pa=n, pc=n, ps=n * l, rf=l, dac=l, bb=1)
        if arch == "aosa":
            return dict(pa=n, pc=0, ps=n, rf=l, dac=l, bb=1)
        if arch == "digital":
            return dict(pa=n, pc=0, ps=0, rf=n, dac=n, bb=1)
        raise ValueError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")

    def consumption_mw(self, arch: str, n: int, l: int, k: int = 1) -> float:
        c = self.device_counts(arch, n, l, k)
        return (
            self.p_pa * c["pa"]
            + self.p_pc * c["pc"]
            + self.p_ps * c["ps"]
            + self.p_rf * c["rf"]
            + self.p_dac * c["dac"]
            + self.p_bb * c["bb"]
        )


def power_consumption(arch: str, n: int, l: int, k: int = 1, model: PowerModel | None = None) -> float:
    """Hardware power of one terminal in watts."""
    return (model or PowerModel()).consumption_mw(arch, n, l, k) / 1000.0


def link_power(
    arch: str,
    n_tx: int,
    n_rx: int,
    l_tx: int,
    l_rx: int,
    transmit_power: float,
    k: int = 1,
    tx_model: PowerModel | None = None,
    rx_model: PowerModel | None = None,
) -> float:
    """``P_Tx + P_Rx + rho`` in watts; ``transmit_power`` is already linear (W)."""
    return (
        power_consumption(arch, n_tx, l_tx, k, tx_model)
        + power_consumption(arch, n_rx, l_rx, k, rx_model)
        + transmit_power
    )


def energy_efficiency(se: float, bandwidth: float, total_power: float) -> float:
    """Delivered bits per joule."""
    if not total_power > 0:
        raise ValueError(f"total power must be positive, got {total_power}")
    return se * bandwidth / total_power
