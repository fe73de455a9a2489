"""Parameter set: dataclass sections, INI loading and ``section.key=value`` overrides.

Every field has an embedded default.  An empty file yields the defaults;
unknown sections or keys are rejected so that typos surface immediately.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .devices import VTH_CLASSES, Corner, DeviceParams, Polarity, make_corner

CELLS_64KB = 65536


class ConfigError(ValueError):
    """Invalid configuration file or override."""


@dataclass
class DeviceSection:
    lvt: float = 0.230
    svt: float = 0.440
    hvt: float = 0.600
    width: float = 0.15
    length: float = 0.06
    nmos_k: float = 178.5e-6
    pmos_k: float = 632.7e-6
    nmos_swing: float = 90.53
    pmos_swing: float = 61.0
    nmos_dibl: float = 0.1749
    pmos_dibl: float = 0.1665
    pmos_vth_offset: float = -0.08381
    clm: float = 0.2733
    vth_tempco: float = 0.1052e-3
    mobility_exponent: float = -1.5
    gate_leak_fraction: float = 0.01


@dataclass
class CornerSection:
    sigma_vth: float = 0.06006
    k_spread: float = 0.10
    temperature: float = 120.0


@dataclass
class CellSection:
    vddm: float = 1.3
    vssm: float = 0.6
    beta_5t: float = 1.0
    beta_6t: float = 1.4
    inverter_vth: str = "HVT"
    access_vth: str = "SVT"
    g_g1w1: float = 8.0e-3  # S, pull-down of vg1 during W1
    g_g2: float = 8.0e-3  # S, vg2 hold to V_SSM
    g_equ: float = 4.724e-4  # S, equalizer between vg1 and vg2


@dataclass
class ArraySection:
    cells_per_subcolumn: int = 64
    bits_per_word: int = 16
    total_cells: int = CELLS_64KB
    c_bl: float = 50e-15
    c_vg1: float = 25e-15
    c_vg2: float = 25e-15
    c_vssm_read_per_64kb: float = 40e-12
    dt: float = 1.4e-9
    bl0_fraction: float = 0.5  # read '0' stops at the sense threshold
    bl1_fraction: float = 1.5  # read '1' lifts BL towards vddm - vth(N3)
    overlap_charge: float = 0.0
    clamp_m1_width: float = 40.0
    clamp_m2_width: float = 80.0
    clamp_m1_vth: str = "SVT"
    clamp_m2_vth: str = "SVT"
    leak_eval: str = "start"
    pattern_zeros: float = 0.5


@dataclass
class TimingSection:
    wl_slew: float = 6.8e9  # V/s, WL 0 -> 1.3 V in ~190 ps
    c_node: float = 0.55e-15
    sense_fraction: float = 0.5
    pulse_factor: float = 2.0
    read_window: float = 1.0e-9
    write_pulse: float = 0.0  # s; 0 selects pulse_factor x worst-corner W1 delay


@dataclass
class PowerSection:
    c_gbit: float = 5e-15
    c_gwr: float = 5e-15
    lp6t_bl_swing_fraction: float = 0.5
    hold_grounds_low: bool = False
    pattern_zeros: float = 0.5


@dataclass
class Config:
    devices: DeviceSection = field(default_factory=DeviceSection)
    corners: CornerSection = field(default_factory=CornerSection)
    cell: CellSection = field(default_factory=CellSection)
    array: ArraySection = field(default_factory=ArraySection)
    timing: TimingSection = field(default_factory=TimingSection)
    power: PowerSection = field(default_factory=PowerSection)

    # -- derived objects ---------------------------------------------------
    def vth_class(self, name: str):
        d = self.devices
        table = {"LVT": d.lvt, "SVT": d.svt, "HVT": d.hvt}
        key = name.upper()
        if key not in table:
            raise ConfigError(f"unknown Vth class {name!r}")
        return dataclasses.replace(VTH_CLASSES[key], nominal_vth=table[key])

    def device(self, polarity: Polarity, vth: str, width_factor: float = 1.0) -> DeviceParams:
        d = self.devices
        nmos = polarity is Polarity.NMOS
        return DeviceParams(
            polarity=polarity,
            width=d.width * width_factor,
            length=d.length,
            vth_class=self.vth_class(vth),
            transconductance_factor=d.nmos_k if nmos else d.pmos_k,
            subthreshold_swing=d.nmos_swing if nmos else d.pmos_swing,
            dibl_factor=d.nmos_dibl if nmos else d.pmos_dibl,
            clm=d.clm,
            vth_offset=0.0 if nmos else d.pmos_vth_offset,
            vth_tempco=d.vth_tempco,
            mobility_exponent=d.mobility_exponent,
            gate_leak_fraction=d.gate_leak_fraction,
            vdd_ref=self.cell.vddm,
        )

    def corner(self, name: str, temperature: float | None = None) -> Corner:
        t = self.corners.temperature if temperature is None else temperature
        return make_corner(name, t, self.corners.sigma_vth, self.corners.k_spread)

    @property
    def c_vssm_read(self) -> float:
        """V_SSM capacitance during read, scaled linearly with array size."""
        a = self.array
        return a.c_vssm_read_per_64kb * a.total_cells / CELLS_64KB

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


SECTIONS = {f.name: f.type for f in fields(Config)}


def _coerce(current, raw: str, where: str):
    raw = raw.strip()
    try:
        if isinstance(current, bool):
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(current, int):
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        if isinstance(current, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {type(current).__name__}") from None
    return raw


def apply_override(cfg: Config, assignment: str) -> None:
    """Apply one ``section.key=value`` override in place."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r}: expected section.key=value")
    lhs, value = assignment.split("=", 1)
    if "." not in lhs:
        raise ConfigError(f"override {assignment!r}: expected section.key=value")
    section, key = (s.strip() for s in lhs.split(".", 1))
    _set(cfg, section, key, value, f"--set {lhs.strip()}")


def _set(cfg: Config, section: str, key: str, value: str, where: str) -> None:
    if section not in SECTIONS:
        raise ConfigError(f"{where}: unknown section [{section}]")
    sec = getattr(cfg, section)
    names = {f.name for f in fields(sec)}
    if key not in names:
        raise ConfigError(f"{where}: unknown key '{section}.{key}'")
    setattr(sec, key, _coerce(getattr(sec, key), value, where))


def load_config(path: str | Path | None = None, overrides: list[str] | tuple = ()) -> Config:
    """Load an INI-style file with sections [devices] [corners] [cell] [array]
    [timing] [power]; missing fields keep their defaults."""
    cfg = Config()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"{path}: file not found")
        text = path.read_text()
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
        parser.optionxform = str
        try:
            parser.read_string(text, source=str(path))
        except configparser.Error as exc:
            raise ConfigError(f"{path}: {exc}") from None
        lines = text.splitlines()
        for section in parser.sections():
            for key, value in parser.items(section):
                lineno = next((i + 1 for i, ln in enumerate(lines)
                               if ln.strip().startswith(key)), "?")
                _set(cfg, section, key, value, f"{path}:{lineno}")
    for ov in overrides:
        apply_override(cfg, ov)
    validate(cfg)
    return cfg


def validate(cfg: Config) -> None:
    a = cfg.array
    for name in ("c_bl", "c_vg1", "c_vg2", "c_vssm_read_per_64kb", "dt"):
        if getattr(a, name) <= 0:
            raise ConfigError(f"array.{name} must be > 0")
    if a.cells_per_subcolumn < 1 or a.bits_per_word < 1 or a.total_cells < 1:
        raise ConfigError("array sizes must be >= 1")
    if cfg.cell.vddm - cfg.cell.vssm < 0:
        raise ConfigError("cell.vddm must be >= cell.vssm")
    if cfg.timing.wl_slew <= 0:
        raise ConfigError("timing.wl_slew must be > 0")
    for name in (cfg.cell.inverter_vth, cfg.cell.access_vth, a.clamp_m1_vth, a.clamp_m2_vth):
        cfg.vth_class(name)
    if a.leak_eval not in ("start", "trapezoid"):
        raise ConfigError("array.leak_eval must be 'start' or 'trapezoid'")


def render(cfg: Config) -> str:
    """INI text of the full parameter set (used to echo inputs in summaries)."""
    out = []
    for name in SECTIONS:
        out.append(f"[{name}]")
        for f in fields(getattr(cfg, name)):
            v = getattr(getattr(cfg, name), f.name)
            out.append(f"{f.name} = {v if isinstance(v, str) else repr(v)}")
        out.append("")
    return "\n".join(out)
