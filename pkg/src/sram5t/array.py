"""V_SSM rail dynamics: per-read charge sharing, leakage replenishment,
steady state under repeated reads and the floating standby rise.

One read detaches a sub-column word (its bit lines and both ground lines)
from V_SSM, drives the grounds to V_SS, and reconnects them afterwards.
The retained charge is shared over the standby capacitance and the array
leakage plus the global diode clamps put charge back during the cycle.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from . import cell as cellmod
from .config import Config
from .devices import Corner, DeviceParams, DomainError, Polarity, drain_current

VSSM_FLOOR = 1e-6
CONVERGED_DV = 10e-6  # V
SETTLED_SLOPE = 1.0  # V/s, i.e. 1 uV/us


class NoSteadyState(RuntimeError):
    pass


@dataclass(frozen=True)
class ArrayConfig:
    cells_per_subcolumn: int = 64
    bits_per_word: int = 16
    total_cells: int = 65536
    c_bl: float = 50e-15
    c_vg1: float = 25e-15
    c_vg2: float = 25e-15
    c_vssm_read: float = 9e-12
    dt: float = 1.4e-9
    clamp_m1: DeviceParams | None = None
    clamp_m2: DeviceParams | None = None
    vddm: float = 1.3
    bl0_fraction: float = 0.3
    bl1_fraction: float = 1.0
    overlap_charge: float = 0.0
    leak_eval: str = "start"

    def __post_init__(self):
        for name in ("c_bl", "c_vg1", "c_vg2"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.c_vssm_read <= 0 or self.dt <= 0:
            raise ValueError("c_vssm_read and dt must be > 0")
        if self.cells_per_subcolumn < 1 or self.bits_per_word < 1:
            raise ValueError("array dimensions must be >= 1")

    @property
    def c_subcol(self) -> float:
        return self.bits_per_word * (self.c_bl + self.c_vg1 + self.c_vg2)

    @property
    def c_vssm_stby(self) -> float:
        return self.c_vssm_read + self.c_subcol

    @classmethod
    def from_config(cls, cfg: Config) -> "ArrayConfig":
        a = cfg.array
        return cls(
            cells_per_subcolumn=a.cells_per_subcolumn,
            bits_per_word=a.bits_per_word,
            total_cells=a.total_cells,
            c_bl=a.c_bl, c_vg1=a.c_vg1, c_vg2=a.c_vg2,
            c_vssm_read=cfg.c_vssm_read,
            dt=a.dt,
            clamp_m1=cfg.device(Polarity.NMOS, a.clamp_m1_vth, a.clamp_m1_width),
            clamp_m2=cfg.device(Polarity.NMOS, a.clamp_m2_vth, a.clamp_m2_width),
            vddm=cfg.cell.vddm,
            bl0_fraction=a.bl0_fraction,
            bl1_fraction=a.bl1_fraction,
            overlap_charge=a.overlap_charge,
            leak_eval=a.leak_eval,
        )


@dataclass(frozen=True)
class VssmState:
    vssm: float
    cycle: int = 0
    n_b0: int = 8
    n_b1: int = 8
    v_bl0: float = 0.0
    v_bl1: float = 0.0
    i_avg: float = 0.0

    @classmethod
    def at(cls, vssm: float, pattern, cfg: ArrayConfig, cycle: int = 0) -> "VssmState":
        n0, n1 = word_counts(pattern, cfg.bits_per_word)
        return cls(vssm, cycle, n0, n1, cfg.bl0_fraction * vssm, cfg.bl1_fraction * vssm)


@dataclass
class VssmTrace:
    samples: list = field(default_factory=list)  # (cycle or time, vssm)
    deltas: list = field(default_factory=list)
    steady_state: float | None = None
    delta_v_tot: float | None = None
    fixed_point: float | None = None

    @property
    def voltages(self) -> np.ndarray:
        return np.array([v for _, v in self.samples])

    @property
    def index(self) -> np.ndarray:
        return np.array([t for t, _ in self.samples])


def word_counts(pattern, bits_per_word: int) -> tuple[int, int]:
    """(n_b0, n_b1) of a word given as a bit sequence."""
    bits = list(pattern)
    if len(bits) != bits_per_word:
        raise ValueError(f"pattern has {len(bits)} bits, word has {bits_per_word}")
    n1 = sum(1 for b in bits if b)
    return len(bits) - n1, n1


def pattern_with_zeros(bits_per_word: int, zeros_fraction: float) -> list[int]:
    n0 = int(round(zeros_fraction * bits_per_word))
    return [0] * n0 + [1] * (bits_per_word - n0)


# --------------------------------------------------------------------------
# per-cycle charge sharing


def phi(state: VssmState, cfg: ArrayConfig) -> float:
    if not state.vssm > VSSM_FLOOR:
        raise DomainError(f"phi undefined for vssm = {state.vssm!r} V")
    shared = (state.v_bl0 / state.vssm) * state.n_b0 + (state.v_bl1 / state.vssm) * state.n_b1
    return (cfg.c_vssm_read + shared * cfg.c_bl) / cfg.c_vssm_stby


def oracle_charge_sharing(state: VssmState, cfg: ArrayConfig) -> float:
    """V_SSM right after reconnection, from explicit charge bookkeeping."""
    charges = [
        cfg.c_vssm_read * state.vssm,
        cfg.c_bl * state.v_bl0 * state.n_b0,
        cfg.c_bl * state.v_bl1 * state.n_b1,
        (cfg.c_vg1 + cfg.c_vg2) * 0.0 * (state.n_b0 + state.n_b1),  # grounds come back from V_SS
    ]
    return float(np.sum(charges)) / cfg.c_vssm_stby


LeakModel = Callable[[float], float]


def zero_leak(v: float) -> float:
    return 0.0


def step_read_cycle(state: VssmState, cfg: ArrayConfig, leak_model: LeakModel = zero_leak) -> VssmState:
    """One read cycle: charge share, then replenish for ``dt``."""
    shared = phi(state, cfg) * state.vssm
    gain = cfg.dt / cfg.c_vssm_stby
    i_avg = leak_model(shared)
    if cfg.leak_eval == "trapezoid":
        i_avg = 0.5 * (i_avg + leak_model(shared + i_avg * gain))
    v = shared + i_avg * gain - cfg.overlap_charge / cfg.c_vssm_stby
    return VssmState(v, state.cycle + 1, state.n_b0, state.n_b1,
                     cfg.bl0_fraction * v, cfg.bl1_fraction * v, i_avg)


def _cycle_map(cfg: ArrayConfig, n0: int, n1: int, leak_model: LeakModel):
    def f(v):
        if v <= VSSM_FLOOR:
            # phi * v -> 0 as v -> 0 because the bit-line levels track vssm
            shared = 0.0
        else:
            shared = phi(VssmState(v, 0, n0, n1, cfg.bl0_fraction * v, cfg.bl1_fraction * v), cfg) * v
        gain = cfg.dt / cfg.c_vssm_stby
        i = leak_model(shared)
        if cfg.leak_eval == "trapezoid":
            i = 0.5 * (i + leak_model(shared + i * gain))
        return shared + i * gain - cfg.overlap_charge / cfg.c_vssm_stby
    return f


def steady_state_fixed_point(cfg: ArrayConfig, pattern, leak_model: LeakModel = zero_leak,
                             v_standby: float | None = None) -> float:
    """V_SSM where one read cycle maps the rail onto itself (bisection)."""
    n0, n1 = word_counts(pattern, cfg.bits_per_word)
    step = _cycle_map(cfg, n0, n1, leak_model)
    hi = cfg.vddm if v_standby is None else v_standby

    def g(v):
        return step(v) - v

    g0 = g(0.0)
    if g0 == 0.0:
        return 0.0
    if not (g0 > 0.0 > g(hi)):
        raise NoSteadyState("cycle map has no sign change on [0, v_standby]")
    a, b = 0.0, hi
    while b - a > 1e-12:
        m = 0.5 * (a + b)
        a, b = (m, b) if g(m) > 0 else (a, m)
    return 0.5 * (a + b)


def run_to_steady_state(cfg: ArrayConfig, pattern, v0: float, max_cycles: int = 10000,
                        leak_model: LeakModel = zero_leak, tol: float = CONVERGED_DV) -> VssmTrace:
    if not 0.0 < v0 <= cfg.vddm:
        raise ValueError("v0 must lie in (0, vddm]")
    state = VssmState.at(v0, pattern, cfg)
    trace = VssmTrace(samples=[(0, v0)])
    for _ in range(max_cycles):
        if state.vssm <= VSSM_FLOOR:
            break
        nxt = step_read_cycle(state, cfg, leak_model)
        dv = state.vssm - nxt.vssm
        trace.deltas.append(dv)
        trace.samples.append((nxt.cycle, nxt.vssm))
        state = nxt
        prev = trace.deltas[-2] if len(trace.deltas) > 1 else None
        # geometric tail still to come, r / (1 - r) of the last step
        r = dv / prev if prev else 0.0
        tail = abs(dv) * r / (1.0 - r) if 0.0 <= r < 1.0 else np.inf
        if abs(dv) < tol and tail < tol:
            trace.steady_state = state.vssm
            trace.delta_v_tot = v0 - state.vssm
            break
    try:
        trace.fixed_point = steady_state_fixed_point(cfg, pattern, leak_model, max(v0, cfg.vddm))
    except NoSteadyState:
        trace.fixed_point = None
    return trace


# --------------------------------------------------------------------------
# leakage + clamps feeding V_SSM


_CELL_TABLES: dict = {}


def cell_feed_table(cfg: Config, corner: Corner, zeros_fraction: float = 0.5, points: int = 41):
    """Per-cell current (A) delivered into V_SSM as a function of V_SSM."""
    cell = cellmod.build_5tsdg(cfg)
    vddm = cfg.cell.vddm
    key = (cell.key(), corner, vddm, zeros_fraction, points)
    if key not in _CELL_TABLES:
        grid = np.linspace(0.0, 0.95 * vddm, points)
        vals = []
        for v in grid:
            leak = cellmod.mean_leakage(cell, corner, cellmod.hold_bias(vddm, v), zeros_fraction)
            vals.append(leak.supply + leak.gate)
        _CELL_TABLES[key] = PchipInterpolator(grid, np.array(vals), extrapolate=True)
    return _CELL_TABLES[key]


@dataclass
class VssmLeakModel:
    """Net current into V_SSM: N cells leaking in, M1 sourcing from V_DDM,
    M2 sinking to V_SS.  Monotone decreasing in V_SSM."""

    cell_current: Callable
    n_cells: int
    m1: DeviceParams
    m2: DeviceParams
    corner: Corner
    vddm: float

    def cells(self, v):
        v = np.clip(v, 0.0, 0.95 * self.vddm)
        return self.n_cells * float(self.cell_current(v))

    def i_m1(self, v):
        d = max(0.0, self.vddm - v)
        return drain_current(self.m1, self.corner, d, d)

    def i_m2(self, v):
        d = max(0.0, v)
        return drain_current(self.m2, self.corner, d, d)

    def __call__(self, v):
        return self.cells(v) + self.i_m1(v) - self.i_m2(v)

    def standby_level(self) -> float:
        return brentq(self, 0.0, self.vddm, xtol=1e-12)


def vssm_leak_model(cfg: Config, corner: Corner | None = None, total_cells: int | None = None) -> VssmLeakModel:
    corner = corner or cfg.corner("FF")
    acfg = ArrayConfig.from_config(cfg)
    n = cfg.array.total_cells if total_cells is None else total_cells
    table = cell_feed_table(cfg, corner, cfg.array.pattern_zeros)
    return VssmLeakModel(table, n, acfg.clamp_m1, acfg.clamp_m2, corner, cfg.cell.vddm)


def standby_rise(cfg: ArrayConfig, leak_model: VssmLeakModel, v0: float = 0.0,
                 t_max: float = 1e-3) -> VssmTrace:
    """Floating V_SSM charged by leakage and clamps from ``v0`` until
    |dV/dt| < 1 uV/us (LSODA, the clamps make it stiff)."""
    c = cfg.c_vssm_stby

    def rhs(t, y):
        return [leak_model(float(y[0])) / c]

    trace = VssmTrace(samples=[(0.0, float(v0))])
    if abs(rhs(0.0, [v0])[0]) < SETTLED_SLOPE:
        trace.steady_state = float(v0)
        return trace

    def settled(t, y):
        return abs(rhs(t, y)[0]) - SETTLED_SLOPE

    settled.terminal = True
    sol = solve_ivp(rhs, (0.0, t_max), [float(v0)], method="LSODA", events=settled,
                    rtol=1e-8, atol=1e-10, first_step=1e-12)
    if sol.status == -1:
        raise RuntimeError(f"standby_rise integration failed: {sol.message}")
    trace.samples = [(float(t), float(v)) for t, v in zip(sol.t, sol.y[0])]
    if sol.status == 1:
        trace.steady_state = float(sol.y[0][-1])
    return trace


def time_to_fraction(trace: VssmTrace, fraction: float = 0.9) -> float:
    t, v = trace.index, trace.voltages
    target = v[0] + fraction * (v[-1] - v[0])
    k = int(np.argmax(v >= target))
    if k == 0:
        return float(t[0])
    return float(np.interp(target, v[k - 1:k + 1], t[k - 1:k + 1]))


def read_mode_excursion(cfg: ArrayConfig, pattern, n_reads: int, leak_model: VssmLeakModel) -> float:
    """Peak |V_SSM - standby level| over ``n_reads`` back-to-back reads."""
    if n_reads <= 0:
        return 0.0
    v_stby = leak_model.standby_level()
    state = VssmState.at(v_stby, pattern, cfg)
    worst = 0.0
    for _ in range(n_reads):
        state = step_read_cycle(state, cfg, leak_model)
        worst = max(worst, abs(state.vssm - v_stby))
    return worst


def scaled(cfg: Config, factor: int, clamps: bool = False) -> Config:
    """Copy of ``cfg`` with the array ``factor`` times larger (C_VSSM follows
    the per-64 Kb scaling rule).  ``clamps`` also widens the global M1/M2 by
    ``factor`` so the standby level stays where the 64 Kb design put it."""
    out = copy.deepcopy(cfg)
    out.array.total_cells = cfg.array.total_cells * factor
    if clamps:
        out.array.clamp_m1_width *= factor
        out.array.clamp_m2_width *= factor
    return out
