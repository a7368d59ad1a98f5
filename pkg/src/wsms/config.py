"""Scenario description and its INI-style file format.

Grammar (``configparser`` dialect, ``#`` or ``;`` comments)::

    [link]
    carrier_frequency = 3e11        # Hz
    bandwidth = 5e9                 # Hz
    noise_power_dbm = -76.2
    transmit_power_dbm = 10, 20     # one or more values

    [geometry]
    distance = 60                   # metres, or a distribution "60:0.5, 100:0.5"
    height_tx = 30
    height_rx = 30
    n_tx = 64
    n_rx = 64

    [array]
    ds_min =                        # blank: no-overlap minimum
    ds_max =                        # blank: derived from aperture_max
    aperture_max = 1.0              # metres, full-array diagonal
    k =                             # blank: search the feasible set
    widen_k = false
    multistart = 64

    [paths]
    include_reflection = true
    reflection_loss_db = 10
    absorption = 0                  # 1/m, power attenuation coefficient
    scatterers = 0
    scatter_loss_db = 15

    [power]
    rx_p_pa =                       # mW; blank: same device figures as the transmitter
    rx_p_pc =
    rx_p_ps =
    rx_p_rf =
    rx_p_dac =
    rx_p_bb =

    [run]
    seed = 0

Every key is optional.  dBm values stay in dBm inside the config and are
converted to watts only through the ``noise_power``/``transmit_power``
properties.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import re
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .channel import PathSet, path_gains_backhaul
from .geometry import wavelength as _wavelength
from .power import PowerModel

__all__ = ["ConfigError", "ScenarioConfig", "dbm_to_watt", "watt_to_dbm", "parse_config", "load_config", "dump_config"]


_RX_POWER_KEYS = ("rx_p_pa", "rx_p_pc", "rx_p_ps", "rx_p_rf", "rx_p_dac", "rx_p_bb")


class ConfigError(ValueError):
    pass


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0


@dataclass(frozen=True)
class ScenarioConfig:
    carrier_frequency: float = 3e11
    bandwidth: float = 5e9
    noise_power_dbm: float = -76.2
    transmit_power_dbm: Tuple[float, ...] = (10.0,)
    distance: float = 60.0
    distance_distribution: Optional[Tuple[Tuple[float, float], ...]] = None
    height_tx: float = 30.0
    height_rx: float = 30.0
    n_tx: int = 64
    n_rx: int = 64
    ds_min: Optional[float] = None
    ds_max: Optional[float] = None
    aperture_max: float = 1.0
    k: Optional[int] = None
    widen_k: bool = False
    multistart: int = 64
    include_reflection: bool = True
    reflection_loss_db: float = 10.0
    absorption: float = 0.0
    scatterers: int = 0
    scatter_loss_db: float = 15.0
    rx_p_pa: Optional[float] = None
    rx_p_pc: Optional[float] = None
    rx_p_ps: Optional[float] = None
    rx_p_rf: Optional[float] = None
    rx_p_dac: Optional[float] = None
    rx_p_bb: Optional[float] = None
    seed: int = 0

    def __post_init__(self):
        pos = ("carrier_frequency", "bandwidth", "distance", "height_tx", "height_rx", "aperture_max")
        for name in pos:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive number, got {v!r}")
        for name in ("n_tx", "n_rx", "multistart"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not self.transmit_power_dbm:
            raise ConfigError("transmit_power_dbm needs at least one value")
        if self.k is not None and (self.k < 1 or self.n_tx % self.k or self.n_rx % self.k):
            raise ConfigError(f"k={self.k} must divide n_tx={self.n_tx} and n_rx={self.n_rx}")
        if self.absorption < 0 or self.scatterers < 0:
            raise ConfigError("absorption and scatterers must be nonnegative")
        if self.ds_min is not None and self.ds_min <= 0:
            raise ConfigError("ds_min must be positive")
        if self.ds_max is not None and self.ds_max <= 0:
            raise ConfigError("ds_max must be positive")
        for name in _RX_POWER_KEYS:
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive power in mW")
        if self.distance_distribution is not None:
            probs = [p for _, p in self.distance_distribution]
            if any(d <= 0 for d, _ in self.distance_distribution) or any(p < 0 for p in probs):
                raise ConfigError("distance distribution needs positive distances and nonnegative weights")
            if not math.isclose(sum(probs), 1.0, rel_tol=1e-9):
                raise ConfigError(f"distance probabilities sum to {sum(probs)}, not 1")

    @property
    def wavelength(self) -> float:
        return _wavelength(self.carrier_frequency)

    @property
    def noise_power(self) -> float:
        return dbm_to_watt(self.noise_power_dbm)

    @property
    def transmit_power(self) -> float:
        return dbm_to_watt(self.transmit_power_dbm[0])

    @property
    def rx_power_model(self) -> PowerModel:
        """Receiver device figures: defaults with any ``rx_*`` override applied."""
        return PowerModel(**{k[3:]: getattr(self, k) for k in _RX_POWER_KEYS if getattr(self, k) is not None})

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def scatterer_points(self, distance: Optional[float] = None):
        """Seeded scatterer positions, scaled to the link distance."""
        if not self.scatterers:
            return ()
        d = self.distance if distance is None else distance
        rng = np.random.default_rng(self.seed)
        u = rng.uniform(size=(self.scatterers, 3))
        h = 0.5 * (self.height_tx + self.height_rx)
        x = (u[:, 0] - 0.5) * 0.5 * d
        y = (0.2 + 0.6 * u[:, 1]) * d
        z = (0.2 + 1.3 * u[:, 2]) * h
        return tuple(zip(x.tolist(), y.tolist(), z.tolist()))

    def paths(self, distance: Optional[float] = None) -> PathSet:
        return path_gains_backhaul(self, distance)


_SCHEMA = {
    "link": ("carrier_frequency", "bandwidth", "noise_power_dbm", "transmit_power_dbm"),
    "geometry": ("distance", "height_tx", "height_rx", "n_tx", "n_rx"),
    "array": ("ds_min", "ds_max", "aperture_max", "k", "widen_k", "multistart"),
    "paths": ("include_reflection", "reflection_loss_db", "absorption", "scatterers", "scatter_loss_db"),
    "power": _RX_POWER_KEYS,
    "run": ("seed",),
}
_FIELDS = {f.name: f for f in dataclasses.fields(ScenarioConfig)}


def _key_line(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip().lower()
            continue
        if current == section and re.match(rf"{re.escape(key)}\s*[=:]", s, re.IGNORECASE):
            return no
    return None


def _section_line(text: str, section: str) -> Optional[int]:
    for no, line in enumerate(text.splitlines(), start=1):
        if line.strip().lower() == f"[{section}]":
            return no
    return None


def _convert(name: str, raw: str):
    raw = raw.strip()
    if name == "transmit_power_dbm":
        vals = tuple(float(v) for v in raw.split(",") if v.strip())
        if not vals:
            raise ValueError("empty list")
        return vals
    if name in ("ds_min", "ds_max", "k") or name in _RX_POWER_KEYS:
        if raw == "":
            return None
        return int(raw) if name == "k" else float(raw)
    if name in ("widen_k", "include_reflection"):
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if name in ("n_tx", "n_rx", "multistart", "scatterers", "seed"):
        return int(raw)
    return float(raw)


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    """Parse the INI text into a :class:`ScenarioConfig`; errors name the line."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    values = {}
    for section in parser.sections():
        sec = section.lower()
        if sec not in _SCHEMA:
            raise ConfigError(f"{source}:{_section_line(text, sec) or '?'}: unknown section [{section}]")
        for key, raw in parser.items(section):
            line = _key_line(text, sec, key) or "?"
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"{source}:{line}: unknown key {key!r} in [{section}]")
            try:
                if sec == "geometry" and key == "distance":
                    if ":" in raw:
                        pairs = []
                        for item in raw.split(","):
                            d, p = item.split(":")
                            pairs.append((float(d), float(p)))
                        values["distance_distribution"] = tuple(pairs)
                        total = sum(p for _, p in pairs)
                        values["distance"] = sum(d * p for d, p in pairs) / total if total > 0 else pairs[0][0]
                    else:
                        values["distance"] = float(raw)
                else:
                    values[key] = _convert(key, raw)
            except ValueError as exc:
                raise ConfigError(f"{source}:{line}: bad value for {key!r}: {exc}") from exc
    try:
        return ScenarioConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_fmt(x) for x in v)
    return str(v)


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical text form; ``parse_config(dump_config(c)) == c``."""
    lines = []
    for sec, keys in _SCHEMA.items():
        lines.append(f"[{sec}]")
        for key in keys:
            if sec == "geometry" and key == "distance" and cfg.distance_distribution:
                val = ", ".join(f"{d!r}:{p!r}" for d, p in cfg.distance_distribution)
            else:
                val = _fmt(getattr(cfg, key))
            lines.append(f"{key} = {val}".rstrip())
        lines.append("")
    return "\n".join(lines)
