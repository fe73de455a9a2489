"""Word-level functional model of one 64x16 sub-column.

Ops run strictly in order.  Each op looks up per-bit outcomes (does a write
flip the cell, does a read discharge the bit line past the sense threshold,
does the read disturb the cell) computed once per cell/corner from
``cell`` and then updates the stored bits and V_SSM.

Timing is first-order RC: the word line ramps at ``wl_slew``, the delay
floor is the time from WL = 50% to WL = 100% vddm, and the internal nodes
(and the bit line for reads) are then integrated with fixed capacitances
and device currents at full word-line drive.
"""
from __future__ import annotations

import copy
import csv
import enum
import io
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from . import array as arr
from . import cell as cellmod
from . import power as pw
from .config import Config, render
from .devices import Corner, channel_current

CORNERS = ("TT", "FF", "SS", "FS", "SF")


class SequenceError(RuntimeError):
    def __init__(self, index: int, message: str):
        super().__init__(f"op {index}: {message}")
        self.index = index


class WriteFail(RuntimeError):
    pass


class Kind(enum.Enum):
    STANDBY = "STANDBY"
    READ = "READ"
    WRITE = "WRITE"


@dataclass(frozen=True)
class OpCommand:
    kind: Kind
    address: int = 0
    data: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.WRITE:
            if self.data is None:
                raise ValueError("WRITE needs data")
            object.__setattr__(self, "data", tuple(int(b) for b in self.data))
        elif self.data is not None:
            raise ValueError("only WRITE carries data")


@dataclass(frozen=True)
class TimingModel:
    wl_slew: float  # V/s
    c_node: float  # F, each storage node
    c_bl: float  # F
    vddm: float
    rd_stby_overlap: float = 0.0  # s
    sense_fraction: float = 0.5
    read_window: float = 1e-9
    t_max: float = 5e-9  # give up on a transition after this long

    def __post_init__(self):
        if self.wl_slew <= 0:
            raise ValueError("wl_slew must be > 0")

    @classmethod
    def from_config(cls, cfg: Config) -> "TimingModel":
        t = cfg.timing
        return cls(t.wl_slew, t.c_node, cfg.array.c_bl, cfg.cell.vddm,
                   sense_fraction=t.sense_fraction, read_window=t.read_window)

    @property
    def floor(self) -> float:
        """WL-slew-limited delay: WL from 50% to 100% vddm."""
        return 0.5 * self.vddm / self.wl_slew


@dataclass
class OpResult:
    index: int
    kind: Kind
    address: int
    read_data: tuple | None = None
    delays: dict = field(default_factory=dict)
    upset_flags: list = field(default_factory=list)
    energy_events: list = field(default_factory=list)
    vssm: float = 0.0

    def __post_init__(self):
        if (self.read_data is not None) != (self.kind is Kind.READ):
            raise ValueError("read_data present iff kind is READ")
        if any(d < 0 for d in self.delays.values()):
            raise ValueError("delays must be >= 0")


@dataclass(frozen=True)
class EnergyEvent:
    op: pw.OpKind
    bits: int
    energy_j: float


# --------------------------------------------------------------------------
# transient helpers


def _node_transient(cell, corner, bias, init, target, c_node, t_max, falling: bool):
    """Time for Q to reach ``target`` with both storage nodes at ``c_node``;
    None if it does not within ``t_max``."""
    if c_node == 0:
        return 0.0

    def rhs(t, y):
        iq, iqz = cellmod.node_currents(cell, corner, bias, y[0], y[1])
        return [iq / c_node, iqz / c_node]

    def hit(t, y):
        return y[0] - target
    hit.terminal = True
    hit.direction = -1 if falling else 1
    if (init[0] - target) * (1 if falling else -1) <= 0:
        return 0.0
    sol = solve_ivp(rhs, (0.0, t_max), list(init), method="LSODA", events=hit,
                    rtol=1e-8, atol=1e-10)
    return float(sol.t_events[0][0]) if sol.t_events[0].size else None


def _hold_state(cell, corner, vddm, ground, stored):
    hb = cellmod.BiasCondition(vddm, ground, ground, ground, vddm if cell.kind is cellmod.CellKind.SIX_T else ground,
                               0.0, vddm if cell.kind is cellmod.CellKind.SIX_T else ground)
    return cellmod.dc_solve(cell, corner, hb, cellmod.seed_for(stored, hb))


def _write_bias(cfg: Config, cell, bit: int, g_equ: float | None = None):
    c = cfg.cell
    vddm, vssm = c.vddm, c.vssm
    if cell.kind is cellmod.CellKind.SIX_T:
        # differential write, grounds at V_SS
        hi, lo = (vddm, 0.0) if bit else (0.0, vddm)
        return cellmod.BiasCondition(vddm, 0.0, 0.0, 0.0, hi, vddm, lo), 0.0
    if bit:
        g = c.g_equ if g_equ is None else g_equ
        vg1, vg2 = cellmod.equalized_grounds(vssm, c.g_g1w1, c.g_g2, g)
        return cellmod.w1_bias(vddm, vssm, vg1, vg2, vddm), vssm
    return cellmod.w0_bias(vddm, vssm, 0.0), vssm


def write_delay(cfg: Config, corner: Corner, bit: int, cell=None, timing: TimingModel | None = None) -> float:
    """WL = 50% vddm to Q = 80% vddm (bit 1) or Q = 20% vddm (bit 0)."""
    cell = cellmod.build_5tsdg(cfg) if cell is None else cell
    timing = TimingModel.from_config(cfg) if timing is None else timing
    bias, ground = _write_bias(cfg, cell, bit)
    start = _hold_state(cell, corner, cfg.cell.vddm, ground, 1 - bit)
    target = (0.8 if bit else 0.2) * cfg.cell.vddm
    tau = _node_transient(cell, corner, bias, start, target, timing.c_node, timing.t_max, falling=not bit)
    if tau is None:
        raise WriteFail(f"W{bit} does not complete at {corner.name}/{corner.temperature:g} C")
    return timing.floor + tau


def w1_delay(cfg: Config, corner: Corner, n3_vth: str | None = None, cell=None,
             timing: TimingModel | None = None) -> float:
    if cell is None:
        cell = cellmod.build_5tsdg(cfg, n3_vth=n3_vth)
    return write_delay(cfg, corner, 1, cell, timing)


def w0_delay(cfg: Config, corner: Corner, cell=None, timing: TimingModel | None = None) -> float:
    return write_delay(cfg, corner, 0, cell, timing)


def read_delay(cfg: Config, corner: Corner, cell=None, timing: TimingModel | None = None) -> float | None:
    """WL = 50% vddm until the bit line of a stored '0' falls to the sense
    threshold; None if it never gets there within ``t_max``."""
    cell = cellmod.build_5tsdg(cfg) if cell is None else cell
    timing = TimingModel.from_config(cfg) if timing is None else timing
    c = cfg.cell
    six = cell.kind is cellmod.CellKind.SIX_T
    vpre = c.vddm if six else c.vssm
    thresh = timing.sense_fraction * vpre
    bias = cellmod.read_bias(c.vddm, c.vssm, vpre)
    start = _hold_state(cell, corner, c.vddm, 0.0 if six else c.vssm, 0)
    acc = cell.devices[cell.access]
    cn, cb = timing.c_node, timing.c_bl
    if cb == 0:
        return timing.floor

    def rhs(t, y):
        q, qz, vbl = y
        b = replace(bias, vbl=vbl, vblz=c.vddm if six else vbl)
        iq, iqz = cellmod.node_currents(cell, corner, b, q, qz)
        i_bl = -channel_current(acc, corner, c.vddm, vbl, q)
        if cn == 0:
            return [0.0, 0.0, i_bl / cb]
        return [iq / cn, iqz / cn, i_bl / cb]

    def hit(t, y):
        return y[2] - thresh
    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(rhs, (0.0, timing.t_max), [start[0], start[1], vpre], method="LSODA",
                    events=hit, rtol=1e-8, atol=1e-10)
    if not sol.t_events[0].size:
        return None
    return timing.floor + float(sol.t_events[0][0])


def w1_disturb_scan(cfg: Config, corner: Corner, g_equ: float | None = None,
                    vg1: float | None = None) -> float:
    """Smallest HOLD SNM (mV) among half-selected cells while W1 drives the
    shared ground lines.  ``vg1`` overrides the delivered vg1 level."""
    c = cfg.cell
    g = c.g_equ if g_equ is None else g_equ
    v1, v2 = cellmod.equalized_grounds(c.vssm, c.g_g1w1, c.g_g2, g)
    if vg1 is not None:
        v1 = vg1
    cell = cellmod.build_5tsdg(cfg)
    # every unselected row sees the same (vg1, vg2); both stored values
    return cellmod.w1_disturb_snm(cell, corner, v1, v2, vddm=c.vddm, vssm=c.vssm).value


# results keyed by the rendered config text, so edits to a Config never hit stale entries
_CONFIGS: dict[str, Config] = {}


def _frozen(cfg: Config) -> str:
    text = render(cfg)
    _CONFIGS.setdefault(text, copy.deepcopy(cfg))
    return text


@lru_cache(maxsize=64)
def _pulse_for(text: str) -> float:
    cfg = _CONFIGS[text]
    worst = max(w1_delay(cfg, cfg.corner(n)) for n in CORNERS)
    return cfg.timing.pulse_factor * worst


def default_write_pulse(cfg: Config) -> float:
    """pulse_factor x the slowest W1 delay over the five corners."""
    return _pulse_for(_frozen(cfg))


# --------------------------------------------------------------------------
# functional model


@dataclass(frozen=True)
class BitOutcomes:
    """Per-bit behaviour of one cell design at one corner."""

    read0_senses: bool  # BL of a stored '0' crosses the sense threshold in time
    read0_upset: bool
    read1_upset: bool
    w1_writes: bool
    w0_writes: bool
    w1_delay: float | None
    w0_delay: float | None
    read_delay: float | None
    disturb_snm_mv: float


def _flip_ok(cfg, cell, corner, bit):
    bias, ground = _write_bias(cfg, cell, bit)
    hold = cellmod.hold_bias(cfg.cell.vddm, cfg.cell.vssm)
    return cellmod.flips(cell, corner, bias, 1 - bit, hold)


@lru_cache(maxsize=128)
def _outcomes(text: str, corner: Corner, pulse: float) -> BitOutcomes:
    cfg = _CONFIGS[text]
    cell = cellmod.build_5tsdg(cfg)
    timing = TimingModel.from_config(cfg)
    c = cfg.cell
    r0 = cellmod.read_disturb_levels(cell, corner, 0, vddm=c.vddm, vssm=c.vssm)
    r1 = cellmod.read_disturb_levels(cell, corner, 1, vddm=c.vddm, vssm=c.vssm)
    rd = read_delay(cfg, corner, cell, timing)
    delays = {}
    writes = {}
    for bit in (0, 1):
        ok = _flip_ok(cfg, cell, corner, bit)
        d = None
        if ok:
            try:
                d = write_delay(cfg, corner, bit, cell, timing)
            except WriteFail:
                d = None
        delays[bit] = d
        writes[bit] = ok and d is not None and d <= pulse
    return BitOutcomes(
        read0_senses=rd is not None and rd <= timing.read_window,
        read0_upset=r0.upset, read1_upset=r1.upset,
        w1_writes=writes[1], w0_writes=writes[0],
        w1_delay=delays[1], w0_delay=delays[0], read_delay=rd,
        disturb_snm_mv=w1_disturb_scan(cfg, corner),
    )


def bit_outcomes(cfg: Config, corner: Corner, pulse: float | None = None) -> BitOutcomes:
    pulse = pw.write_pulse(cfg) if pulse is None else pulse
    return _outcomes(_frozen(cfg), corner, pulse)


@dataclass
class SubColumn:
    """Stored bits (rows x bits_per_word) and the V_SSM level."""

    bits: np.ndarray
    vssm: float

    @classmethod
    def filled(cls, cfg: Config, value: int = 0, rows: int | None = None) -> "SubColumn":
        rows = cfg.array.cells_per_subcolumn if rows is None else rows
        return cls(np.full((rows, cfg.array.bits_per_word), value, dtype=np.int8), cfg.cell.vssm)

    @property
    def words(self) -> int:
        return self.bits.shape[0]


def execute(sequence, cfg: Config, corner: Corner | str, temp: float | None = None,
            state: SubColumn | None = None, pulse: float | None = None) -> list[OpResult]:
    """Run ``sequence`` on ``state`` (a fresh all-'0' sub-column if omitted)."""
    if isinstance(corner, str):
        corner = cfg.corner(corner, temp)
    elif temp is not None:
        corner = corner.at(temp)
    state = SubColumn.filled(cfg) if state is None else state
    sequence = list(sequence)
    if not sequence:
        return []
    pulse = pw.write_pulse(cfg) if pulse is None else pulse
    out = bit_outcomes(cfg, corner, pulse)
    acfg = arr.ArrayConfig.from_config(cfg)
    leak = arr.vssm_leak_model(cfg, corner)
    e = {op: pw.bit_energy(cfg, pw.CellType.FIVE_T_SDG, op, pulse) for op in pw.OpKind}
    e = {op: b.ground + b.bitline + b.globalbit for op, b in e.items()}
    nbits = cfg.array.bits_per_word
    results = []
    for i, cmd in enumerate(sequence):
        if not isinstance(cmd, OpCommand):
            raise SequenceError(i, f"not an OpCommand: {cmd!r}")
        if not 0 <= cmd.address < state.words:
            raise SequenceError(i, f"address {cmd.address} outside 0..{state.words - 1}")
        res = OpResult(i, cmd.kind, cmd.address, read_data=() if cmd.kind is Kind.READ else None)
        try:
            if cmd.kind is Kind.READ:
                _do_read(state, cmd, out, res, e)
                word = [int(b) for b in state.bits[cmd.address]]
                s = arr.VssmState.at(state.vssm, word, acfg)
                state.vssm = arr.step_read_cycle(s, acfg, leak).vssm
            elif cmd.kind is Kind.WRITE:
                if len(cmd.data) != nbits:
                    raise SequenceError(i, f"data has {len(cmd.data)} bits, expected {nbits}")
                _do_write(state, cmd, out, res, e)
            else:
                # floating rail relaxes through leakage and the clamps
                state.vssm += leak(state.vssm) * acfg.dt / acfg.c_vssm_stby
        except SequenceError:
            raise
        except Exception as exc:  # solver failures carry the op index
            raise SequenceError(i, str(exc)) from exc
        res.vssm = state.vssm
        results.append(res)
    return results


def _do_read(state, cmd, out: BitOutcomes, res: OpResult, e):
    row = state.bits[cmd.address]
    data = []
    for k, b in enumerate(row):
        if b == 0:
            data.append(0 if out.read0_senses else 1)
            if out.read0_upset:
                res.upset_flags.append(((cmd.address, k), "ReadUpset"))
        else:
            data.append(1)
            if out.read1_upset:
                res.upset_flags.append(((cmd.address, k), "ReadUpset"))
    for k, b in enumerate(row):
        if b == 0 and out.read0_upset:
            row[k] = 1
        elif b == 1 and out.read1_upset:
            row[k] = 0
    res.read_data = tuple(data)
    if out.read_delay is not None:
        res.delays["READ"] = out.read_delay
    n0 = int(np.sum(np.asarray(data) == 0))
    n1 = len(data) - n0
    if n0:
        res.energy_events.append(EnergyEvent(pw.OpKind.R0, n0, n0 * e[pw.OpKind.R0]))
    if n1:
        res.energy_events.append(EnergyEvent(pw.OpKind.R1, n1, n1 * e[pw.OpKind.R1]))


def _do_write(state, cmd, out: BitOutcomes, res: OpResult, e):
    row = state.bits[cmd.address]
    data = np.asarray(cmd.data, dtype=np.int8)
    for k, (old, new) in enumerate(zip(row, data)):
        if old == new:
            continue
        if (new == 1 and out.w1_writes) or (new == 0 and out.w0_writes):
            row[k] = new
    ones = int(data.sum())
    if ones:
        res.delays["W1"] = out.w1_delay if out.w1_delay is not None else 0.0
        res.energy_events.append(EnergyEvent(pw.OpKind.W1, ones, ones * e[pw.OpKind.W1]))
        if out.disturb_snm_mv <= 0:
            for r in range(state.words):
                if r != cmd.address:
                    res.upset_flags.append(((r, None), "WriteDisturb"))
    zeros = len(data) - ones
    if zeros:
        res.delays["W0"] = out.w0_delay if out.w0_delay is not None else 0.0
        res.energy_events.append(EnergyEvent(pw.OpKind.W0, zeros, zeros * e[pw.OpKind.W0]))


TRACE_HEADER = ["op_index", "kind", "address", "delay_s", "flags"]


def trace_rows(results: list[OpResult]) -> list[list[str]]:
    rows = []
    for r in results:
        delay = max(r.delays.values()) if r.delays else 0.0
        flags = ";".join(sorted({kind for _, kind in r.upset_flags}))
        rows.append([str(r.index), r.kind.value, str(r.address), repr(float(delay)), flags])
    return rows


def trace_csv(results: list[OpResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    w.writerows(trace_rows(results))
    return buf.getvalue()


def round_trip(cfg: Config, corner: Corner | str, temp: float | None = None,
               patterns=None, rows: int | None = None) -> bool:
    """Write every pattern into every row, read it back; True iff all match."""
    state = SubColumn.filled(cfg, rows=rows)
    nbits = cfg.array.bits_per_word
    if patterns is None:
        patterns = [tuple((p >> k) & 1 for k in range(nbits))
                    for p in (0x0000, 0xFFFF, 0xAAAA, 0x5555, 0x00FF, 0xFF00, 0x1234, 0xEDCB)]
    seq, expect = [], []
    for p in patterns:
        for r in range(state.words):
            seq.append(OpCommand(Kind.WRITE, r, tuple(p)))
        for r in range(state.words):
            seq.append(OpCommand(Kind.READ, r))
            expect.append(tuple(p))
    res = execute(seq, cfg, corner, temp, state)
    got = [r.read_data for r in res if r.kind is Kind.READ]
    flags = any(r.upset_flags for r in res)
    return got == expect and not flags
