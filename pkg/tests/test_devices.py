import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sram5t import devices as D
from sram5t.config import Config

CFG = Config()
TT = CFG.corner("TT", 27)


def nmos(vth="SVT", **kw):
    return CFG.device(D.Polarity.NMOS, vth, **kw)


def pmos(vth="SVT"):
    return CFG.device(D.Polarity.PMOS, vth)


def test_vth_class_defaults():
    assert D.LVT.nominal_vth == 0.230
    assert D.SVT.nominal_vth == 0.440
    assert D.HVT.nominal_vth == 0.600
    assert D.LVT.nominal_vth < D.SVT.nominal_vth < D.HVT.nominal_vth


def test_device_defaults_and_validation():
    d = D.DeviceParams(D.Polarity.NMOS)
    assert (d.width, d.length) == (0.15, 0.06)
    with pytest.raises(ValueError):
        D.DeviceParams(D.Polarity.NMOS, width=0.0)
    with pytest.raises(ValueError):
        D.DeviceParams(D.Polarity.NMOS, subthreshold_swing=150.0)
    with pytest.raises(ValueError):
        D.DeviceParams(D.Polarity.NMOS, subthreshold_swing=55.0)


def test_tt_corner_is_unscaled():
    c = D.make_corner("TT")
    assert c.nmos_scale == c.pmos_scale == 1.0
    assert c.nmos_dvth == c.pmos_dvth == 0.0
    with pytest.raises(ValueError):
        D.make_corner("XX")


def test_zero_vds_gives_zero_current():
    for vgs in (-0.3, 0.0, 0.5, 1.3):
        assert D.drain_current(nmos(), TT, vgs, 0.0) == 0.0


def test_decade_per_swing_in_deep_subthreshold():
    dev = nmos("HVT")
    s = D.swing_at(dev, TT)
    i_hi = D.drain_current(dev, TT, -0.1, 1.0)
    i_lo = D.drain_current(dev, TT, -0.1 - s, 1.0)
    assert i_hi / i_lo == pytest.approx(10.0, rel=0.01)


def test_swing_at_nominal_temperature_is_the_parameter():
    dev = nmos()
    assert D.swing_at(dev, TT) * 1e3 == pytest.approx(dev.subthreshold_swing, rel=1e-12)


@pytest.mark.parametrize("pol", [D.Polarity.NMOS, D.Polarity.PMOS])
def test_corner_ordering_per_polarity(pol):
    dev = CFG.device(pol, "SVT")
    cur = {n: D.drain_current(dev, CFG.corner(n, 27), 0.8, 0.8) for n in D.CORNER_NAMES}
    leak = {n: D.off_leakage(dev, CFG.corner(n, 27), 1.3) for n in D.CORNER_NAMES}
    for table in (cur, leak):
        assert table["SS"] < table["TT"] < table["FF"]
        if pol is D.Polarity.NMOS:
            assert table["FS"] > table["TT"] > table["SF"]
        else:
            assert table["SF"] > table["TT"] > table["FS"]


def test_nonfinite_bias_rejected():
    with pytest.raises(D.DomainError):
        D.drain_current(nmos(), TT, float("nan"), 0.5)
    with pytest.raises(D.DomainError):
        D.drain_current(nmos(), TT, 0.5, float("inf"))
    with pytest.raises(D.DomainError):
        D.drain_current(nmos(), TT, 0.5, -0.1)


def test_off_leakage_examples():
    assert D.off_leakage(nmos(), TT, 0.0) == 0.0
    assert D.off_leakage(nmos("HVT"), TT, 1.0) < D.off_leakage(nmos("SVT"), TT, 1.0)
    with pytest.raises(D.DomainError):
        D.off_leakage(nmos(), TT, -0.2)


OFF_DEVICES = [(D.Polarity.NMOS, v) for v in ("LVT", "SVT", "HVT")] + \
    [(D.Polarity.PMOS, v) for v in ("SVT", "HVT")]


@pytest.mark.parametrize("pol,vth", OFF_DEVICES)
@pytest.mark.parametrize("corner", D.CORNER_NAMES)
def test_off_leakage_hotter_is_larger(pol, vth, corner):
    dev = CFG.device(pol, vth)
    co = CFG.corner(corner)
    assert D.off_leakage(dev, co, 1.0, 120.0) > D.off_leakage(dev, co, 1.0, 27.0)


def test_lvt_pmos_is_not_off_at_zero_gate_drive():
    # |vth| ~ 86 mV at fast-PMOS corners: conducting at vgs = 0, so mobility
    # loss outweighs the subthreshold gain and "leakage" falls with T
    dev = CFG.device(D.Polarity.PMOS, "LVT")
    co = CFG.corner("FF", 27)
    assert D.threshold(dev, co) < 4 * D.swing_at(dev, co) / math.log(10)


def test_off_leakage_monotone_in_vds_and_vth():
    dev = nmos()
    vds = np.linspace(0.0, 1.3, 60)
    leak = [D.off_leakage(dev, TT, v) for v in vds]
    assert np.all(np.diff(leak) > 0)
    by_class = [D.off_leakage(nmos(v), TT, 0.7) for v in ("LVT", "SVT", "HVT")]
    assert by_class[0] > by_class[1] > by_class[2]


def test_dense_monotonicity():
    vgs = np.linspace(-0.5, 1.5, 401)
    vds = np.linspace(0.0, 1.5, 301)
    g, d = np.meshgrid(vgs, vds, indexing="ij")
    for dev in (nmos("LVT"), nmos("HVT"), pmos("HVT")):
        for corner in ("FF", "SS"):
            i = D.drain_current(dev, CFG.corner(corner), g, d)
            assert np.all(np.diff(i, axis=0) >= 0)
            assert np.all(np.diff(i, axis=1) >= 0)


def test_analytic_derivatives_match_finite_differences():
    dev = nmos()
    h = 1e-5
    for vgs in (0.1, 0.45, 0.9, 1.3):
        for vds in (0.05, 0.4, 1.2):
            gm, gds = D.drain_current_derivatives(dev, TT, vgs, vds)
            fd_gm = (D.drain_current(dev, TT, vgs + h, vds) - D.drain_current(dev, TT, vgs - h, vds)) / (2 * h)
            fd_gds = (D.drain_current(dev, TT, vgs, vds + h) - D.drain_current(dev, TT, vgs, vds - h)) / (2 * h)
            assert gm == pytest.approx(fd_gm, rel=1e-6)
            assert gds == pytest.approx(fd_gds, rel=1e-6)


def test_channel_current_antisymmetric_and_continuous():
    dev = nmos()
    a = D.channel_current(dev, TT, 1.0, 0.3, 0.7)
    b = D.channel_current(dev, TT, 1.0, 0.7, 0.3)
    assert a == -b
    assert D.channel_current(dev, TT, 1.0, 0.5, 0.5) == 0.0
    near = D.channel_current(dev, TT, 1.0, 0.5 + 1e-9, 0.5)
    assert abs(near) < 1e-9


def test_thermal_voltage():
    assert D.thermal_voltage(27.0) == pytest.approx(0.025865, rel=1e-4)
    assert math.isclose(D.thermal_voltage(120.0) / D.thermal_voltage(27.0), 393.15 / 300.15)


@settings(max_examples=60, deadline=None)
@given(
    vgs=st.floats(-0.5, 1.5),
    vds=st.floats(0.0, 1.5),
    dv=st.floats(1e-4, 0.3),
    swing=st.floats(60.0, 140.0),
    k=st.floats(50e-6, 800e-6),
    dibl=st.floats(0.0, 0.25),
    corner=st.sampled_from(D.CORNER_NAMES),
    temp=st.floats(-40.0, 150.0),
)
def test_drain_current_monotone_property(vgs, vds, dv, swing, k, dibl, corner, temp):
    dev = D.DeviceParams(D.Polarity.NMOS, transconductance_factor=k, subthreshold_swing=swing,
                         dibl_factor=dibl)
    co = D.make_corner(corner, temp)
    i0 = D.drain_current(dev, co, vgs, vds)
    assert i0 >= 0.0
    assert D.drain_current(dev, co, vgs + dv, vds) >= i0
    assert D.drain_current(dev, co, vgs, vds + dv) >= i0
