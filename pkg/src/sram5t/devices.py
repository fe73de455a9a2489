"""Compact MOSFET current model with Vth classes, process corners and temperature.

The channel current is a single smooth EKV-style expression,

    I = Ispec * [F(x_f) - F(x_r)] * (1 + clm * vds)
    F(x) = ln(1 + exp(x))**2
    x_f = (vgs - vth) / (2 n Vt),   x_r = (vgs - vth - n vds) / (2 n Vt)
    Ispec = 2 n beta Vt**2

which is exponential in deep subthreshold (one decade per n*Vt*ln10 of gate
drive) and square law above threshold, with C-infinity derivatives in both
bias voltages.  Temperature enters through the thermal voltage, a mobility
exponent on beta and a linear threshold-voltage coefficient.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

K_OVER_Q = 8.617333262e-5  # V/K
T_NOMINAL_C = 27.0
ZERO_C = 273.15
LN10 = math.log(10.0)


class DomainError(ValueError):
    """Bias or state outside the domain of a model formula."""


class Polarity(enum.Enum):
    NMOS = "nmos"
    PMOS = "pmos"


@dataclass(frozen=True)
class VthClass:
    name: str
    nominal_vth: float


LVT = VthClass("LVT", 0.230)
SVT = VthClass("SVT", 0.440)
HVT = VthClass("HVT", 0.600)
VTH_CLASSES = {c.name: c for c in (LVT, SVT, HVT)}


@dataclass(frozen=True)
class Corner:
    """Process corner plus die temperature.

    ``nmos_scale``/``pmos_scale`` multiply the transconductance factor and
    ``nmos_dvth``/``pmos_dvth`` shift the threshold magnitude.
    """

    name: str
    nmos_scale: float = 1.0
    pmos_scale: float = 1.0
    nmos_dvth: float = 0.0
    pmos_dvth: float = 0.0
    temperature: float = T_NOMINAL_C

    def at(self, temperature: float) -> "Corner":
        return replace(self, temperature=float(temperature))


CORNER_NAMES = ("TT", "FF", "SS", "FS", "SF")


def make_corner(name: str, temperature: float = T_NOMINAL_C,
                sigma_vth: float = 0.040, k_spread: float = 0.10) -> Corner:
    """Build one of TT/FF/SS/FS/SF; first letter is NMOS, second PMOS."""
    name = name.upper()
    if name not in CORNER_NAMES:
        raise ValueError(f"unknown corner {name!r}")
    sign = {"T": 0.0, "F": 1.0, "S": -1.0}
    sn, sp = sign[name[0]], sign[name[1]]
    return Corner(
        name=name,
        nmos_scale=1.0 + sn * k_spread,
        pmos_scale=1.0 + sp * k_spread,
        nmos_dvth=-sn * sigma_vth,
        pmos_dvth=-sp * sigma_vth,
        temperature=float(temperature),
    )


@dataclass(frozen=True)
class DeviceParams:
    polarity: Polarity
    width: float = 0.15  # um
    length: float = 0.06  # um
    vth_class: VthClass = HVT
    transconductance_factor: float = 300e-6  # A/V^2 per square
    subthreshold_swing: float = 90.0  # mV/decade at 27 C
    dibl_factor: float = 0.08  # V/V
    clm: float = 0.05  # 1/V, output conductance
    vth_offset: float = 0.0  # V, mismatch / body hook
    vth_tempco: float = 1.0e-3  # V/K, threshold magnitude drop with T
    mobility_exponent: float = -1.5
    gate_leak_fraction: float = 0.01
    vdd_ref: float = 1.3  # V, full supply used to size the gate-leak conductance

    def __post_init__(self):
        if not (self.width > 0 and self.length > 0):
            raise ValueError("device width and length must be positive")
        if not 60.0 <= self.subthreshold_swing <= 140.0:
            raise ValueError("subthreshold swing must lie in [60, 140] mV/decade")

    @property
    def aspect(self) -> float:
        return self.width / self.length

    def scaled(self, width_factor: float) -> "DeviceParams":
        return replace(self, width=self.width * width_factor)

    def with_class(self, vth_class: VthClass) -> "DeviceParams":
        return replace(self, vth_class=vth_class)


def thermal_voltage(temperature_c: float) -> float:
    return K_OVER_Q * (temperature_c + ZERO_C)


def slope_factor(dev: DeviceParams) -> float:
    return dev.subthreshold_swing * 1e-3 / (thermal_voltage(T_NOMINAL_C) * LN10)


def swing_at(dev: DeviceParams, corner: Corner) -> float:
    """Subthreshold swing (V/decade) at the corner temperature."""
    return slope_factor(dev) * thermal_voltage(corner.temperature) * LN10


def threshold(dev: DeviceParams, corner: Corner, vds=0.0):
    """Effective threshold magnitude including corner, temperature and DIBL."""
    dvth = corner.nmos_dvth if dev.polarity is Polarity.NMOS else corner.pmos_dvth
    vth0 = (dev.vth_class.nominal_vth + dev.vth_offset + dvth
            - dev.vth_tempco * (corner.temperature - T_NOMINAL_C))
    return vth0 - dev.dibl_factor * np.asarray(vds, dtype=float)


def beta(dev: DeviceParams, corner: Corner) -> float:
    scale = corner.nmos_scale if dev.polarity is Polarity.NMOS else corner.pmos_scale
    tk = corner.temperature + ZERO_C
    tk0 = T_NOMINAL_C + ZERO_C
    return dev.transconductance_factor * dev.aspect * scale * (tk / tk0) ** dev.mobility_exponent


def _softplus(x):
    return np.logaddexp(0.0, x)


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _check_finite(*values):
    for v in values:
        if not np.all(np.isfinite(v)):
            raise DomainError("non-finite bias voltage")


def _terms(dev, corner, vgs, vds):
    vgs = np.asarray(vgs, dtype=float)
    vds = np.asarray(vds, dtype=float)
    _check_finite(vgs, vds)
    if np.any(vds < 0.0):
        raise DomainError("vds must be >= 0 after polarity normalisation")
    n = slope_factor(dev)
    vt = thermal_voltage(corner.temperature)
    ispec = 2.0 * n * beta(dev, corner) * vt * vt
    vth = threshold(dev, corner, vds)
    denom = 2.0 * n * vt
    xf = (vgs - vth) / denom
    xr = (vgs - vth - n * vds) / denom
    return n, denom, ispec, xf, xr, vds


def drain_current(dev: DeviceParams, corner: Corner, vgs, vds):
    """Channel current (A) for source-referenced vgs and vds >= 0.

    PMOS callers pass vsg and vsd; the returned magnitude is the same form.
    Accepts scalars or numpy arrays.
    """
    _, _, ispec, xf, xr, vds = _terms(dev, corner, vgs, vds)
    sf, sr = _softplus(xf), _softplus(xr)
    out = ispec * (sf * sf - sr * sr) * (1.0 + dev.clm * vds)
    return float(out) if out.ndim == 0 else out


def drain_current_derivatives(dev: DeviceParams, corner: Corner, vgs, vds):
    """Analytic (dI/dvgs, dI/dvds)."""
    n, denom, ispec, xf, xr, vds = _terms(dev, corner, vgs, vds)
    sf, sr = _softplus(xf), _softplus(xr)
    # dF/dx = 2 ln(1+e^x) sigmoid(x)
    dff = 2.0 * sf * _sigmoid(xf)
    dfr = 2.0 * sr * _sigmoid(xr)
    body = sf * sf - sr * sr
    scale = 1.0 + dev.clm * vds
    eta = dev.dibl_factor
    gm = ispec * scale * (dff - dfr) / denom
    gds = ispec * (scale * (dff * eta - dfr * (eta - n)) / denom + dev.clm * body)
    if gm.ndim == 0:
        return float(gm), float(gds)
    return gm, gds


def gate_conductance(dev: DeviceParams, corner: Corner) -> float:
    """Linear gate-to-channel conductance, a fixed fraction of the full-supply
    subthreshold off-current."""
    i_off = drain_current(dev, corner, 0.0, dev.vdd_ref)
    return dev.gate_leak_fraction * i_off / dev.vdd_ref


def off_leakage(dev: DeviceParams, corner: Corner, vds: float,
                temperature: float | None = None) -> float:
    """Off-state leakage (A): channel current at vgs = 0 plus gate leakage.

    Gate leakage is ``g * (|vgs| + |vgd|) / 2``, the same split used by
    :func:`device_leakage`.
    """
    if temperature is not None:
        corner = corner.at(temperature)
    if not np.isfinite(vds):
        raise DomainError("non-finite vds")
    if vds < 0:
        raise DomainError("vds must be >= 0")
    return drain_current(dev, corner, 0.0, vds) + 0.5 * gate_conductance(dev, corner) * vds


def channel_current(dev: DeviceParams, corner: Corner, vg, va, vb):
    """Current flowing from terminal a to terminal b through the channel.

    Source/drain roles are assigned from the terminal voltages, so the result
    is antisymmetric in (a, b) and continuous through va == vb.
    """
    vg = np.asarray(vg, dtype=float)
    va = np.asarray(va, dtype=float)
    vb = np.asarray(vb, dtype=float)
    vds = np.abs(va - vb)
    if dev.polarity is Polarity.NMOS:
        vsrc = np.minimum(va, vb)
        i = drain_current(dev, corner, vg - vsrc, vds)
    else:
        vsrc = np.maximum(va, vb)
        i = drain_current(dev, corner, vsrc - vg, vds)
    out = np.where(va >= vb, i, -i)
    return float(out) if out.ndim == 0 else out


def device_leakage(dev: DeviceParams, corner: Corner, vg: float, va: float, vb: float) -> float:
    """Magnitude of channel plus gate leakage for a device at fixed terminals."""
    ch = abs(channel_current(dev, corner, vg, va, vb))
    g = gate_conductance(dev, corner)
    return ch + g * 0.5 * (abs(vg - va) + abs(vg - vb))
