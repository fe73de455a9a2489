"""Standby, read and write power for the 5TSDG array and the two 6T baselines.

Energies are tallied per accessed bit and per op; a word op is the sum over
its bits.  Every swing is charged as C * dV**2 per cycle (half on each edge).
Sense-amplifier static current is not modelled.
"""
from __future__ import annotations

import copy
import enum
from dataclasses import dataclass
from typing import Sequence

from . import cell as cellmod
from .config import Config
from .devices import Corner

# Reference scales quoted with the comparison tables; reported, not reproduced.
FIG_STANDBY_UNIT_W = 1.3e-3
FIG_ACCESS_UNIT_W = 33.8e-3


class CellType(enum.Enum):
    FIVE_T_SDG = "5TSDG"
    LP6T = "LP6T"
    CONV6T = "Conv6T"


class OpKind(enum.Enum):
    STBY = "STBY"
    R0 = "R0"
    R1 = "R1"
    W0 = "W0"
    W1 = "W1"


@dataclass(frozen=True)
class PowerBreakdown:
    op_kind: OpKind
    standby_w: float = 0.0
    ground_swing_w: float = 0.0
    bitline_w: float = 0.0
    globalbit_w: float = 0.0

    def __post_init__(self):
        for name in ("standby_w", "ground_swing_w", "bitline_w", "globalbit_w"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def total_w(self) -> float:
        return self.standby_w + self.ground_swing_w + self.bitline_w + self.globalbit_w

    @property
    def dynamic_w(self) -> float:
        return self.ground_swing_w + self.bitline_w + self.globalbit_w


@dataclass(frozen=True)
class BitEnergy:
    ground: float = 0.0
    bitline: float = 0.0
    globalbit: float = 0.0

    def __add__(self, other: "BitEnergy") -> "BitEnergy":
        return BitEnergy(self.ground + other.ground, self.bitline + other.bitline,
                         self.globalbit + other.globalbit)


def dynamic_power(c_l: float, delta_v: float, f: float) -> float:
    """Ground-line switching power c_l * delta_v**2 * f."""
    if c_l < 0 or delta_v < 0 or f < 0:
        raise ValueError("dynamic_power inputs must be >= 0")
    return c_l * delta_v * delta_v * f


def rails(cfg: Config, cell_type: CellType) -> tuple[float, float, float]:
    """(vddm, vssm, bit-line pre-charge) in standby."""
    vddm, vssm = cfg.cell.vddm, cfg.cell.vssm
    if cell_type is CellType.FIVE_T_SDG:
        return vddm, vssm, vssm
    if cell_type is CellType.LP6T:
        return vddm, vssm, vddm
    return vddm, 0.0, vddm


def build_cell(cfg: Config, cell_type: CellType) -> cellmod.CellTopology:
    if cell_type is CellType.FIVE_T_SDG:
        return cellmod.build_5tsdg(cfg)
    return cellmod.build_6t(cfg)


def _corner(cfg: Config, corner: Corner | str, temp: float | None) -> Corner:
    if isinstance(corner, str):
        return cfg.corner(corner, temp)
    return corner if temp is None else corner.at(temp)


def standby_bias(cfg: Config, cell_type: CellType) -> cellmod.BiasCondition:
    vddm, vssm, vpre = rails(cfg, cell_type)
    return cellmod.BiasCondition(vddm, vssm, vssm, vssm, vpre, 0.0, vpre)


def cell_leakage(cfg: Config, cell_type: CellType, corner: Corner | str, temp: float | None = None,
                 zeros_fraction: float | None = None) -> cellmod.Leakage:
    zeros = cfg.power.pattern_zeros if zeros_fraction is None else zeros_fraction
    co = _corner(cfg, corner, temp)
    return cellmod.mean_leakage(build_cell(cfg, cell_type), co, standby_bias(cfg, cell_type), zeros)


def subcolumn_leakage(cfg: Config, cell_type: CellType, corner: Corner | str, temp: float | None = None) -> float:
    """Leakage current (A) of one sub-column of cells."""
    return cfg.array.cells_per_subcolumn * cell_leakage(cfg, cell_type, corner, temp).total


def standby_power(cfg: Config, cell_type: CellType, corner: Corner | str, temp: float | None = None,
                  zeros_fraction: float | None = None, n_cells: int | None = None) -> float:
    vddm, vssm, vpre = rails(cfg, cell_type)
    leak = cell_leakage(cfg, cell_type, corner, temp, zeros_fraction)
    n = cfg.array.total_cells if n_cells is None else n_cells
    per_cell = (leak.supply + leak.gate) * (vddm - vssm) + leak.bitline * (vpre - vssm)
    return n * per_cell


# --------------------------------------------------------------------------
# per-bit op energies


def write_pulse(cfg: Config) -> float:
    """W1 pulse width (s): configured value, or pulse_factor x worst-corner W1 delay."""
    if cfg.timing.write_pulse > 0:
        return cfg.timing.write_pulse
    from .sequencer import default_write_pulse

    return default_write_pulse(cfg)


def equalizer_crowbar(cfg: Config, pulse: float) -> float:
    """Energy (J) burnt through the V_SSM -> M_g2 -> M_equ -> M_g1w1 -> V_SS
    path during one W1 pulse."""
    c = cfg.cell
    if c.g_equ <= 0:
        return 0.0
    r = 1.0 / c.g_g1w1 + 1.0 / c.g_g2 + 1.0 / c.g_equ
    return cfg.cell.vssm ** 2 / r * pulse


def bit_energy(cfg: Config, cell_type: CellType, op: OpKind, pulse: float | None = None) -> BitEnergy:
    vddm, vssm, _ = rails(cfg, cell_type)
    a, p = cfg.array, cfg.power
    if op is OpKind.STBY:
        return BitEnergy()
    if cell_type is not CellType.FIVE_T_SDG:
        if op in (OpKind.R0, OpKind.R1):
            swing = p.lp6t_bl_swing_fraction * vddm
            return BitEnergy(0.0, a.c_bl * swing ** 2, p.c_gbit * vddm ** 2)
        return BitEnergy(0.0, a.c_bl * vddm ** 2, p.c_gwr * vddm ** 2)
    if op in (OpKind.R0, OpKind.R1):
        ground = 0.0 if p.hold_grounds_low else (a.c_vg1 + a.c_vg2) * vssm ** 2
        if op is OpKind.R0:
            return BitEnergy(ground, a.c_bl * (vssm - a.bl0_fraction * vssm) ** 2, p.c_gbit * vssm ** 2)
        return BitEnergy(ground, a.c_bl * (a.bl1_fraction * vssm - vssm) ** 2, 0.0)
    if op is OpKind.W0:
        return BitEnergy(0.0, a.c_bl * vssm ** 2, 0.0)
    vg1, vg2 = cellmod.equalized_grounds(vssm, cfg.cell.g_g1w1, cfg.cell.g_g2, cfg.cell.g_equ)
    pulse = write_pulse(cfg) if pulse is None else pulse
    ground = (a.c_vg1 * (vssm - vg1) ** 2 + a.c_vg2 * (vssm - vg2) ** 2
              + equalizer_crowbar(cfg, pulse))
    return BitEnergy(ground, a.c_bl * (vddm - vssm) ** 2, p.c_gwr * vddm ** 2)


def word_energy(cfg: Config, cell_type: CellType, read: bool, word_pattern: Sequence[int],
                pulse: float | None = None) -> BitEnergy:
    total = BitEnergy()
    for bit in word_pattern:
        if read:
            op = OpKind.R1 if bit else OpKind.R0
        else:
            op = OpKind.W1 if bit else OpKind.W0
        total = total + bit_energy(cfg, cell_type, op, pulse)
    return total


def _access_power(cfg, cell_type, corner, temp, word_pattern, duty, read: bool, pulse=None) -> PowerBreakdown:
    if duty < 0 or duty > 1.0 / cfg.array.dt * (1 + 1e-12):
        raise ValueError("duty must lie in [0, 1/dt]")
    bits = list(word_pattern)
    if len(bits) != cfg.array.bits_per_word:
        raise ValueError("word pattern length must equal bits_per_word")
    if read:
        kind = OpKind.R1 if all(bits) else OpKind.R0
    else:
        kind = OpKind.W1 if any(bits) else OpKind.W0
    stby = standby_power(cfg, cell_type, corner, temp)
    if duty == 0:
        return PowerBreakdown(kind, stby)
    e = word_energy(cfg, cell_type, read, bits, pulse)
    return PowerBreakdown(kind, stby, e.ground * duty, e.bitline * duty, e.globalbit * duty)


def read_power(cfg: Config, cell_type: CellType, corner: Corner | str, temp: float | None,
               word_pattern: Sequence[int], duty: float) -> PowerBreakdown:
    return _access_power(cfg, cell_type, corner, temp, word_pattern, duty, True)


def write_power(cfg: Config, cell_type: CellType, corner: Corner | str, temp: float | None,
                word_pattern: Sequence[int], duty: float, pulse: float | None = None) -> PowerBreakdown:
    return _access_power(cfg, cell_type, corner, temp, word_pattern, duty, False, pulse)


def op_power(cfg: Config, cell_type: CellType, corner, temp, op: OpKind, duty: float | None = None,
             pulse: float | None = None) -> PowerBreakdown:
    """Continuous access to one word holding all-'0' or all-'1' data."""
    duty = 1.0 / cfg.array.dt if duty is None else duty
    n = cfg.array.bits_per_word
    if op is OpKind.STBY:
        return PowerBreakdown(op, standby_power(cfg, cell_type, corner, temp))
    word = [1 if op in (OpKind.R1, OpKind.W1) else 0] * n
    if op in (OpKind.R0, OpKind.R1):
        return read_power(cfg, cell_type, corner, temp, word, duty)
    return write_power(cfg, cell_type, corner, temp, word, duty, pulse)


def read_power_vs_vddm(cfg: Config, vddm_list: Sequence[float], v_min: float = 0.7,
                       corner: Corner | str = "FF", temp: float | None = None,
                       duty: float | None = None) -> list[dict]:
    """Read and standby power of the 5TSDG array with V_SSM = V_DDM - v_min."""
    rows = []
    for vddm in vddm_list:
        if vddm - v_min <= 0:
            raise ValueError("every vddm must exceed v_min")
        c = copy.deepcopy(cfg)
        c.cell.vddm = vddm
        c.cell.vssm = vddm - v_min
        word = [0, 1] * (c.array.bits_per_word // 2) + [0] * (c.array.bits_per_word % 2)
        d = 1.0 / c.array.dt if duty is None else duty
        pb = read_power(c, CellType.FIVE_T_SDG, corner, temp, word, d)
        rows.append({"vddm": vddm, "vssm": c.cell.vssm, "read_w": pb.total_w,
                     "standby_w": pb.standby_w, "ground_swing_w": pb.ground_swing_w})
    r0, s0 = rows[0]["read_w"], rows[0]["standby_w"]
    for r in rows:
        r["read_norm"] = r["read_w"] / r0
        r["standby_norm"] = r["standby_w"] / s0 if s0 > 0 else 0.0
    return rows


@dataclass(frozen=True)
class CompareRow:
    cell_type: CellType
    corner: str
    temp_c: float
    breakdown: PowerBreakdown
    normalized: float

    def as_csv(self) -> list:
        b = self.breakdown
        return [self.cell_type.value, self.corner, repr(float(self.temp_c)), b.op_kind.value,
                repr(b.standby_w), repr(b.ground_swing_w), repr(b.bitline_w), repr(b.globalbit_w),
                repr(b.total_w), repr(self.normalized)]


REPORT_HEADER = ["cell_type", "corner", "temp_c", "op_kind", "standby_w", "ground_swing_w",
                 "bitline_w", "globalbit_w", "total_w", "normalized"]


def compare_report(cfg: Config, corners: Sequence[str] = ("TT", "FF", "SS", "FS", "SF"),
                   temp: float | None = None,
                   cell_types: Sequence[CellType] = (CellType.FIVE_T_SDG, CellType.LP6T, CellType.CONV6T),
                   baseline: CellType = CellType.LP6T,
                   ops: Sequence[OpKind] = tuple(OpKind)) -> list[CompareRow]:
    """Power per op kind, cell type and corner, normalised to ``baseline``
    at the same corner and op kind."""
    temp = cfg.corners.temperature if temp is None else temp
    pulse = write_pulse(cfg)
    rows = []
    for name in corners:
        co = cfg.corner(name, temp)
        base = {op: op_power(cfg, baseline, co, None, op, pulse=pulse).total_w for op in ops}
        for ct in cell_types:
            for op in ops:
                pb = op_power(cfg, ct, co, None, op, pulse=pulse)
                rows.append(CompareRow(ct, name, temp, pb, pb.total_w / base[op]))
    return rows


def reduction(a: float, b: float) -> float:
    """Fractional saving of ``a`` relative to ``b``."""
    return (b - a) / b
