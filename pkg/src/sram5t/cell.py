"""5TSDG and 6T cell instances, DC operating points and stability/write margins.

Node convention: Q is driven by the N2/P2 inverter (input Qz) and is the node
reached by the access device; Qz is driven by N1/P1 (input Q).  The N1 source
is the ``vg1`` ground line and the N2 source is ``vg2``.  For the 6T cell A1
connects BL to Q and A2 connects BLB to Qz.
"""
from __future__ import annotations

import enum
from functools import lru_cache
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from scipy.optimize import brentq

from .devices import Corner, DeviceParams, Polarity, channel_current, gate_conductance
from .margins import seevinck_snm

FIVE_T_ROLES = ("N1", "P1", "N2", "P2", "N3")
SIX_T_ROLES = ("N1", "P1", "N2", "P2", "A1", "A2")


class NoConvergence(RuntimeError):
    pass


class CellKind(enum.Enum):
    FIVE_T_SDG = "5TSDG"
    SIX_T = "6T"


class Mode(enum.Enum):
    HOLD = "HOLD"
    READ = "READ"


class Extraction(enum.Enum):
    SEEVINCK_SQUARE = "SeevinckSquare"
    TRIP_CROSSING = "TripCrossing"
    BISECTION_FLIP = "BisectionFlip"


@dataclass(frozen=True)
class CellTopology:
    kind: CellKind
    devices: Mapping[str, DeviceParams]

    def __post_init__(self):
        roles = FIVE_T_ROLES if self.kind is CellKind.FIVE_T_SDG else SIX_T_ROLES
        if set(self.devices) != set(roles):
            raise ValueError(f"{self.kind.value} cell needs roles {roles}")

    @property
    def access(self) -> str:
        return "N3" if self.kind is CellKind.FIVE_T_SDG else "A1"

    @property
    def cell_ratio_beta(self) -> float:
        return self.devices["N2"].aspect / self.devices[self.access].aspect

    def with_device(self, role: str, dev: DeviceParams) -> "CellTopology":
        devs = dict(self.devices)
        devs[role] = dev
        return replace(self, devices=devs)

    def key(self):
        return (self.kind, tuple(sorted(self.devices.items(), key=lambda kv: kv[0])))

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True)
class BiasCondition:
    vddm: float
    vssm: float
    vg1: float
    vg2: float
    vbl: float
    vwl: float
    vblz: float | None = None

    def __post_init__(self):
        if self.vddm - self.vssm < 0:
            raise ValueError("vddm - vssm must be >= 0")

    @property
    def rail_low(self) -> float:
        return min(self.vg1, self.vg2)


def hold_bias(vddm: float = 1.3, vssm: float = 0.6, vbl: float | None = None,
              vg1: float | None = None, vg2: float | None = None) -> BiasCondition:
    vbl = vssm if vbl is None else vbl
    return BiasCondition(vddm, vssm, vssm if vg1 is None else vg1,
                         vssm if vg2 is None else vg2, vbl, 0.0, vbl)


def read_bias(vddm: float = 1.3, vssm: float = 0.6, vbl: float | None = None,
              ground: float = 0.0) -> BiasCondition:
    vbl = vssm if vbl is None else vbl
    return BiasCondition(vddm, vssm, ground, ground, vbl, vddm, vbl)


# --------------------------------------------------------------------------
# circuit equations


def node_currents(cell: CellTopology, corner: Corner, bias: BiasCondition, q, qz):
    """Net current (A) flowing into Q and into Qz for clamped node voltages."""
    d = cell.devices
    b = bias
    iq = (channel_current(d["P2"], corner, qz, b.vddm, q)
          - channel_current(d["N2"], corner, qz, q, b.vg2)
          + channel_current(d[cell.access], corner, b.vwl, b.vbl, q))
    iqz = (channel_current(d["P1"], corner, q, b.vddm, qz)
           - channel_current(d["N1"], corner, q, qz, b.vg1))
    if cell.kind is CellKind.SIX_T:
        vblz = b.vbl if b.vblz is None else b.vblz
        iqz = iqz + channel_current(d["A2"], corner, b.vwl, vblz, qz)
    return iq, iqz


def _bracket(bias: BiasCondition):
    lo = min(bias.vg1, bias.vg2, bias.vbl, bias.vddm, 0.0) - 0.3
    hi = max(bias.vddm, bias.vbl, bias.vwl) + 0.3
    return lo, hi


def _bisect_decreasing(fn, lo, hi, shape, iters=42):
    """Vectorised bisection for fn(x) strictly decreasing in x."""
    a = np.full(shape, lo, dtype=float)
    b = np.full(shape, hi, dtype=float)
    for _ in range(iters):
        m = 0.5 * (a + b)
        pos = fn(m) > 0.0
        a = np.where(pos, m, a)
        b = np.where(pos, b, m)
    return 0.5 * (a + b)


def vtc_a(cell, corner, bias, q):
    """Qz as a function of clamped Q (N1/P1 half-cell)."""
    q = np.asarray(q, dtype=float)
    lo, hi = _bracket(bias)
    return _bisect_decreasing(lambda z: node_currents(cell, corner, bias, q, z)[1], lo, hi, q.shape)


def vtc_b(cell, corner, bias, qz):
    """Q as a function of clamped Qz (N2/P2 half-cell plus access device)."""
    qz = np.asarray(qz, dtype=float)
    lo, hi = _bracket(bias)
    return _bisect_decreasing(lambda x: node_currents(cell, corner, bias, x, qz)[0], lo, hi, qz.shape)


def _vtc_a_scalar(cell, corner, bias, q: float) -> float:
    lo, hi = _bracket(bias)
    return brentq(lambda z: node_currents(cell, corner, bias, q, z)[1], lo, hi, xtol=1e-15, rtol=1e-15)


def reduced_residual(cell, corner, bias, q):
    """Current into Q with Qz slaved to its own equilibrium."""
    if np.ndim(q) == 0:
        q = float(q)
        return node_currents(cell, corner, bias, q, _vtc_a_scalar(cell, corner, bias, q))[0]
    q = np.asarray(q, dtype=float)
    return node_currents(cell, corner, bias, q, vtc_a(cell, corner, bias, q))[0]


def _newton(cell, corner, bias, x, tol, max_iter, max_step=0.05, h=1e-7):
    x = np.array(x, dtype=float)
    for _ in range(max_iter):
        f = np.array(node_currents(cell, corner, bias, x[0], x[1]))
        if np.max(np.abs(f)) < tol:
            return x, f
        jac = np.empty((2, 2))
        for j in range(2):
            dx = np.zeros(2)
            dx[j] = h
            fp = np.array(node_currents(cell, corner, bias, *(x + dx)))
            fm = np.array(node_currents(cell, corner, bias, *(x - dx)))
            jac[:, j] = (fp - fm) / (2 * h)
        try:
            step = -np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            break
        biggest = np.max(np.abs(step))
        if biggest > max_step:
            step *= max_step / biggest
        x = x + step
    f = np.array(node_currents(cell, corner, bias, x[0], x[1]))
    if np.max(np.abs(f)) < tol:
        return x, f
    raise NoConvergence(f"KCL residual {np.max(np.abs(f)):.3e} A after {max_iter} iterations at {x}")


def dc_solve(cell: CellTopology, corner: Corner, bias: BiasCondition, init,
             *, max_iter: int = 200, tol: float = 1e-12) -> tuple[float, float]:
    """Operating point (Q, Qz) reached from ``init``.

    The equilibrium is selected by following the sign of the reduced
    (Qz-slaved) residual from init's Q to its first zero, which is the state
    the cell settles into; a damped 2-D Newton then polishes the point until
    both KCL residuals are below ``tol``.
    """
    q0, qz0 = float(init[0]), float(init[1])
    if not (bias.rail_low - 0.2 - 1e-12 <= q0 <= bias.vddm + 0.2 + 1e-12
            and bias.rail_low - 0.2 - 1e-12 <= qz0 <= bias.vddm + 0.2 + 1e-12):
        raise ValueError("init outside [vssm - 0.2, vddm + 0.2]")
    f0 = node_currents(cell, corner, bias, q0, qz0)
    if max(abs(f0[0]), abs(f0[1])) < tol:
        return q0, qz0
    q = _flow_root(cell, corner, bias, q0)
    qz = _vtc_a_scalar(cell, corner, bias, q)
    x, _ = _newton(cell, corner, bias, (q, qz), tol, max_iter)
    return float(x[0]), float(x[1])


def _flow_root(cell, corner, bias, q0, step=2e-3):
    lo, hi = _bracket(bias)
    r0 = float(reduced_residual(cell, corner, bias, q0))
    if r0 == 0.0:
        return q0
    direction = 1.0 if r0 > 0 else -1.0
    end = hi if direction > 0 else lo
    n = max(2, int(abs(end - q0) / step) + 2)
    grid = np.linspace(q0, end, n)
    r = reduced_residual(cell, corner, bias, grid)
    s = np.sign(r)
    change = np.nonzero(s[1:] != s[0])[0]
    if change.size == 0:
        raise NoConvergence("reduced residual has no root in the flow direction")
    k = int(change[0])
    a, b = sorted((grid[k], grid[k + 1]))
    return brentq(lambda x: reduced_residual(cell, corner, bias, x), a, b, xtol=1e-14, rtol=1e-15)


def equilibria(cell, corner, bias, points: int = 1301) -> list[tuple[float, float]]:
    """All DC solutions, found as sign changes of the reduced residual."""
    lo, hi = bias.rail_low - 0.1, bias.vddm + 0.1
    grid = np.linspace(lo, hi, points)
    r = reduced_residual(cell, corner, bias, grid)
    out = []
    for k in np.nonzero(np.sign(r[:-1]) != np.sign(r[1:]))[0]:
        q = brentq(lambda x: reduced_residual(cell, corner, bias, x), grid[k], grid[k + 1],
                   xtol=1e-14, rtol=1e-15)
        out.append((q, _vtc_a_scalar(cell, corner, bias, q)))
    return out


def stored_bit(q: float, qz: float) -> int:
    return 1 if q > qz else 0


def seed_for(bit: int, bias: BiasCondition) -> tuple[float, float]:
    low = bias.rail_low
    return (bias.vddm, low) if bit else (low, bias.vddm)


# --------------------------------------------------------------------------
# margins


@dataclass
class MarginResult:
    value: float  # mV
    curve_a: np.ndarray = field(repr=False, default=None)
    curve_b: np.ndarray = field(repr=False, default=None)
    extraction: Extraction = Extraction.SEEVINCK_SQUARE
    monostable: bool = False
    lobes: tuple = ()


def trip_voltage(cell: CellTopology, corner: Corner, bias: BiasCondition) -> float:
    """Input level (V, relative to V_SS) where the Q-sensing inverter's VTC
    meets the identity line."""
    lo, hi = bias.rail_low, bias.vddm

    def g(v):
        return node_currents(cell, corner, bias, v, v)[1]

    if not (g(lo) > 0 > g(hi)):
        raise ValueError("inverter VTC does not cross the identity line inside the bias range")
    a, b = lo, hi
    while b - a > 1e-13:
        m = 0.5 * (a + b)
        a, b = (m, b) if g(m) > 0 else (a, m)
    return 0.5 * (a + b)


def _sweep_points(cell, corner, bias, n=512, refine=129, width=0.04):
    lo, hi = bias.rail_low, bias.vddm
    pts = [np.linspace(lo, hi, n)]
    try:
        t = trip_voltage(cell, corner, bias)
        pts.append(np.linspace(max(lo, t - width), min(hi, t + width), refine))
    except ValueError:
        pass
    return np.unique(np.concatenate(pts))


def butterfly(cell: CellTopology, corner: Corner, bias: BiasCondition, mode: Mode | str = Mode.HOLD):
    """Two VTCs as (N, 2) arrays of (vin, vout): curve_a is Q -> Qz, curve_b is Qz -> Q."""
    mode = Mode(mode)
    bias = replace(bias, vwl=bias.vddm if mode is Mode.READ else 0.0)
    vin = _sweep_points(cell, corner, bias)
    a = np.column_stack([vin, vtc_a(cell, corner, bias, vin)])
    b = np.column_stack([vin, vtc_b(cell, corner, bias, vin)])
    return a, b


def snm(cell: CellTopology, corner: Corner, bias: BiasCondition, mode: Mode | str = Mode.HOLD) -> MarginResult:
    a, b = butterfly(cell, corner, bias, mode)
    value, lobes, mono = seevinck_snm(a, b)
    return MarginResult(value * 1e3, a, b, Extraction.SEEVINCK_SQUARE, mono,
                        tuple(x * 1e3 for x in lobes))


def rnm(cell: CellTopology, corner: Corner, bl_bias: float, *, vddm: float = 1.3,
        vssm: float = 0.6) -> MarginResult:
    """Read noise margin: READ butterfly with grounds at V_SS and BL clamped."""
    return snm(cell, corner, read_bias(vddm, vssm, bl_bias), Mode.READ)


@dataclass
class ReadDisturb:
    volts: float
    upset: bool


def read_disturb_levels(cell: CellTopology, corner: Corner, stored: int, *,
                        vddm: float = 1.3, vssm: float = 0.6,
                        vbl: float | None = None) -> ReadDisturb:
    """Q_max (stored '0') or Q_min (stored '1') at the read operating point."""
    bias = read_bias(vddm, vssm, vbl)
    q, qz = dc_solve(cell, corner, bias, seed_for(stored, bias))
    return ReadDisturb(q, stored_bit(q, qz) != stored)


def equalized_grounds(vssm: float, g_pull: float, g_hold: float, g_equ: float) -> tuple[float, float]:
    """(vg1, vg2) delivered during W1: vg1 pulled to V_SS through ``g_pull``,
    vg2 held at V_SSM through ``g_hold``, and M_equ a conductance between them."""
    if g_equ == np.inf:
        v = vssm * g_hold / (g_hold + g_pull)
        return v, v
    r = 1.0 / g_pull + 1.0 / g_hold + (1.0 / g_equ if g_equ > 0 else np.inf)
    i = vssm / r
    return i / g_pull, vssm - i / g_hold


def w1_bias(vddm, vssm, vg1, vg2, vbl) -> BiasCondition:
    return BiasCondition(vddm, vssm, vg1, vg2, vbl, vddm, vbl)


def w0_bias(vddm, vssm, vbl) -> BiasCondition:
    # vg1 floats near V_SSM during W0; modelled as clamped there
    return BiasCondition(vddm, vssm, vssm, vssm, vbl, vddm, vbl)


def flips(cell, corner, bias, original: int, start_bias: BiasCondition | None = None) -> bool:
    """Quasi-static flip predicate: does the cell, seeded from its stored
    state, settle in the opposite state under ``bias``?"""
    start_bias = start_bias or bias
    seed = dc_solve(cell, corner, replace(start_bias, vwl=0.0), seed_for(original, start_bias))
    try:
        q, qz = dc_solve(cell, corner, bias, seed)
    except NoConvergence:
        q, qz = dc_solve(cell, corner, bias, seed_for(1 - original, bias))
    return stored_bit(q, qz) != original


@dataclass
class WriteMargin:
    which: str
    value: float | None  # V, None when the write is impossible
    bl_threshold: float | None
    write_fail: bool


def write_margin(cell: CellTopology, corner: Corner, which: str, *, vddm: float = 1.3,
                 vssm: float = 0.6, vg1: float = 0.0, vg2: float | None = None,
                 resolution: float = 1e-3, bracket: tuple[float, float] | None = None) -> WriteMargin:
    """W0M = highest BL that still writes '0'; W1M = vddm - lowest BL that writes '1'.

    ``vg1``/``vg2`` are the ground-line levels delivered during W1 (vg2
    defaults to V_SSM).  The flip predicate is bisected to ``resolution``.
    """
    which = which.upper()
    vg2 = vssm if vg2 is None else vg2
    lo, hi = bracket if bracket is not None else (0.0, vddm)
    hold = hold_bias(vddm, vssm)
    if which == "W0M":
        def pred(v):
            return flips(cell, corner, w0_bias(vddm, vssm, v), 1, hold)
        # flips at low BL, not at high BL
        if not pred(lo):
            return WriteMargin(which, None, None, True)
        if pred(hi):
            return WriteMargin(which, hi, hi, False)
        a, b = lo, hi
        while b - a > resolution:
            m = 0.5 * (a + b)
            a, b = (m, b) if pred(m) else (a, m)
        return WriteMargin(which, a, a, False)
    if which == "W1M":
        def pred(v):
            return flips(cell, corner, w1_bias(vddm, vssm, vg1, vg2, v), 0, hold)
        if not pred(hi):
            return WriteMargin(which, None, None, True)
        if pred(lo):
            return WriteMargin(which, vddm - lo, lo, False)
        a, b = lo, hi
        while b - a > resolution:
            m = 0.5 * (a + b)
            a, b = (a, m) if pred(m) else (m, b)
        return WriteMargin(which, vddm - b, b, False)
    raise ValueError("which must be 'W0M' or 'W1M'")


def w1_disturb_snm(cell: CellTopology, corner: Corner, vg1: float, vg2: float, *,
                   vddm: float = 1.3, vssm: float = 0.6) -> MarginResult:
    """HOLD SNM of a half-selected cell whose ground lines sit at (vg1, vg2)."""
    return snm(cell, corner, hold_bias(vddm, vssm, vg1=vg1, vg2=vg2), Mode.HOLD)


@dataclass(frozen=True)
class Leakage:
    """Static currents (A) of one cell at its DC state.

    ``supply`` is the channel current drawn from V_DDM, ``bitline`` the
    current sourced by the pre-charged bit line(s) (never negative) and
    ``gate`` the summed gate-leak magnitude.
    """

    supply: float
    bitline: float
    gate: float

    @property
    def total(self) -> float:
        return self.supply + self.bitline + self.gate


def _terminals(cell, bias, q, qz):
    b = bias
    out = {
        "P1": (q, b.vddm, qz), "N1": (q, qz, b.vg1),
        "P2": (qz, b.vddm, q), "N2": (qz, q, b.vg2),
        cell.access: (b.vwl, b.vbl, q),
    }
    if cell.kind is CellKind.SIX_T:
        out["A2"] = (b.vwl, b.vbl if b.vblz is None else b.vblz, qz)
    return out


def leakage(cell: CellTopology, corner: Corner, bias: BiasCondition, stored: int) -> Leakage:
    q, qz = dc_solve(cell, corner, bias, seed_for(stored, bias))
    d = cell.devices
    terms = _terminals(cell, bias, q, qz)
    supply = channel_current(d["P1"], corner, q, bias.vddm, qz) + channel_current(d["P2"], corner, qz, bias.vddm, q)
    bl = max(0.0, channel_current(d[cell.access], corner, *terms[cell.access]))
    if "A2" in terms:
        bl += max(0.0, channel_current(d["A2"], corner, *terms["A2"]))
    gate = sum(gate_conductance(d[r], corner) * 0.5 * (abs(g - a) + abs(g - b))
               for r, (g, a, b) in terms.items())
    return Leakage(max(0.0, supply), bl, gate)


@lru_cache(maxsize=4096)
def mean_leakage(cell: CellTopology, corner: Corner, bias: BiasCondition, zeros_fraction: float = 0.5) -> Leakage:
    """Leakage averaged over stored data with the given fraction of '0's."""
    l0 = leakage(cell, corner, bias, 0)
    l1 = leakage(cell, corner, bias, 1)
    w = zeros_fraction
    return Leakage(w * l0.supply + (1 - w) * l1.supply,
                   w * l0.bitline + (1 - w) * l1.bitline,
                   w * l0.gate + (1 - w) * l1.gate)


# --------------------------------------------------------------------------
# topology builders


def build_5tsdg(cfg, n3_vth: str | None = None, beta: float | None = None,
                access_width: float = 1.0) -> CellTopology:
    """5TSDG cell from the config: HVT inverters, SVT access by default, beta = 1."""
    from .devices import Polarity as P
    c = cfg.cell
    beta = c.beta_5t if beta is None else beta
    inv = c.inverter_vth
    acc = c.access_vth if n3_vth is None else n3_vth
    devs = {
        "N1": cfg.device(P.NMOS, inv, beta * access_width),
        "N2": cfg.device(P.NMOS, inv, beta * access_width),
        "P1": cfg.device(P.PMOS, inv),
        "P2": cfg.device(P.PMOS, inv),
        "N3": cfg.device(P.NMOS, acc, access_width),
    }
    return CellTopology(CellKind.FIVE_T_SDG, devs)


def build_6t(cfg, beta: float | None = None) -> CellTopology:
    c = cfg.cell
    beta = c.beta_6t if beta is None else beta
    inv, acc = c.inverter_vth, c.access_vth
    devs = {
        "N1": cfg.device(Polarity.NMOS, inv, beta),
        "N2": cfg.device(Polarity.NMOS, inv, beta),
        "P1": cfg.device(Polarity.PMOS, inv),
        "P2": cfg.device(Polarity.PMOS, inv),
        "A1": cfg.device(Polarity.NMOS, acc),
        "A2": cfg.device(Polarity.NMOS, acc),
    }
    return CellTopology(CellKind.SIX_T, devs)


def build_5t_with_6t_ratios(cfg) -> CellTopology:
    """A 5T cell sized like a conventional 6T (beta = 1.4)."""
    return build_5tsdg(cfg, beta=cfg.cell.beta_6t)
