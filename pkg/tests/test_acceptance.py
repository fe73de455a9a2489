"""Acceptance criteria, one test each.

Every test is tagged with its criterion number; the terminal summary prints
one PASS/FAIL line per criterion with the measured numbers.
"""
import time

import numpy as np
import pytest

from sram5t import array as A
from sram5t import cell as C
from sram5t import power as P
from sram5t import sequencer as S
from sram5t import targets
from sram5t.config import Config

from oracles import charge_shared, flip_scan, largest_square

CFG = Config()
CORNERS = targets.CORNERS
criterion = pytest.mark.criterion


@pytest.fixture
def note(record_property):
    def add(text):
        record_property("detail", text)
    return add


@criterion(1, "per-cycle update is charge sharing plus leakage (1000 configs, < 1 s)")
def test_charge_sharing_identity(note):
    rng = np.random.default_rng(20240601)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        c_read = 10 ** rng.uniform(-13, -9)
        c_bl, c_vg1, c_vg2 = 10 ** rng.uniform(-16, -12), 10 ** rng.uniform(-17, -12), 10 ** rng.uniform(-17, -12)
        n0 = int(rng.integers(0, 17))
        v = rng.uniform(0.01, 1.3)
        v0, v1 = v * rng.uniform(0, 1), v * rng.uniform(0, 2)
        g, i0 = rng.uniform(0, 1e-3), rng.uniform(-1e-5, 1e-5)
        a = A.ArrayConfig(c_vssm_read=c_read, c_bl=c_bl, c_vg1=c_vg1, c_vg2=c_vg2, dt=rng.uniform(1e-10, 1e-8))
        s = A.VssmState(v, 0, n0, 16 - n0, v0, v1)

        def leak(x):
            return g * (0.6 - x) + i0

        n = A.step_read_cycle(s, a, leak)
        ref = charge_shared(c_read, c_bl, c_vg1, c_vg2, n0, 16 - n0, v, v0, v1)
        shared = n.vssm - leak(A.oracle_charge_sharing(s, a)) * a.dt / a.c_vssm_stby
        worst = max(worst, abs(shared - ref) / abs(ref), abs(A.oracle_charge_sharing(s, a) - ref) / abs(ref))
    dt = time.perf_counter() - t0
    note(f"max rel err {worst:.1e}, {dt:.2f} s")
    assert worst <= 1e-12
    assert dt < 1.0


@criterion(2, "dynamic power multiplicative in C, f and quadratic in V to 1e-12")
def test_dynamic_power_scaling(note):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(2000):
        c, v, f, k = 10 ** rng.uniform(-16, -9), rng.uniform(1e-3, 2.0), 10 ** rng.uniform(0, 10), rng.uniform(0.01, 100)
        p = P.dynamic_power(c, v, f)
        for got, want in ((P.dynamic_power(k * c, v, f), k * p), (P.dynamic_power(c, v, k * f), k * p),
                          (P.dynamic_power(c, k * v, f), k * k * p)):
            worst = max(worst, abs(got - want) / want)
    note(f"max rel err {worst:.1e}")
    assert worst <= 1e-12


def snm_configs():
    c5, c6 = C.build_5tsdg(CFG), C.build_6t(CFG)
    hold6 = C.BiasCondition(1.3, 0.0, 0.0, 0.0, 1.3, 0.0, 1.3)
    out = []
    for n in CORNERS:
        out += [(c5, n, C.hold_bias(), "HOLD"), (c5, n, C.read_bias(), "READ"),
                (c5, n, C.hold_bias(1.0, 0.6), "HOLD"), (c6, n, hold6, "HOLD")]
    return out


@criterion(3, "butterfly SNM equals brute-force largest square within 1 mV (20 configs, < 30 s)")
def test_snm_vs_brute_force(note):
    t0 = time.perf_counter()
    cfgs = snm_configs()
    errs = []
    for cell, n, bias, mode in cfgs:
        r = C.snm(cell, CFG.corner(n), bias, mode)
        errs.append(abs(r.value - 1e3 * largest_square(r.curve_a, r.curve_b)))
    dt = time.perf_counter() - t0
    note(f"{len(cfgs)} configs, max err {max(errs):.2f} mV, {dt:.1f} s")
    assert len(cfgs) >= 20
    assert max(errs) <= 1.0
    assert dt < 30.0


@criterion(4, "read-cycle steps nonincreasing, fixed-point residual < 10 uV")
def test_steady_state(note):
    a = A.ArrayConfig.from_config(CFG)
    word = A.pattern_with_zeros(16, CFG.array.pattern_zeros)
    worst_gap = worst_res = 0.0
    mono = True
    for n in CORNERS:
        leak = A.vssm_leak_model(CFG, CFG.corner(n))
        tr = A.run_to_steady_state(a, word, leak.standby_level(), leak_model=leak)
        assert tr.steady_state is not None
        mono &= bool(np.all(np.diff(tr.deltas) <= 0))
        s = A.VssmState.at(tr.fixed_point, word, a)
        ph = A.phi(s, a)
        res = tr.fixed_point * (1 - ph) - leak(ph * tr.fixed_point) * a.dt / a.c_vssm_stby
        worst_res = max(worst_res, abs(res))
        worst_gap = max(worst_gap, abs(tr.steady_state - tr.fixed_point))
    note(f"monotone={mono}, |run - fixed point| {worst_gap * 1e6:.2f} uV, residual {worst_res * 1e6:.2e} uV")
    assert mono
    assert worst_gap < 10e-6 and worst_res < 10e-6


@criterion(5, "total V_SSM drop strictly decreasing over x1/x16/x32 arrays")
def test_size_scaling(note):
    word = A.pattern_with_zeros(16, CFG.array.pattern_zeros)
    totals = []
    for k in (1, 16, 32):
        c = A.scaled(CFG, k, clamps=True)
        leak = A.vssm_leak_model(c, c.corner("FF"))
        tr = A.run_to_steady_state(A.ArrayConfig.from_config(c), word, leak.standby_level(), leak_model=leak)
        totals.append(tr.delta_v_tot)
    note(", ".join(f"{t * 1e3:.3f}" for t in totals) + " mV")
    assert all(x > y for x, y in zip(totals, totals[1:]))


@criterion(6, "64x16 write-then-read round trip, 5 corners x 27/120 C (< 60 s)")
def test_round_trip(note):
    t0 = time.perf_counter()
    bad = [(n, t) for n in CORNERS for t in (27.0, 120.0)
           if not S.round_trip(CFG, n, t, rows=64)]
    dt = time.perf_counter() - t0
    note(f"failures {bad or 'none'}, {dt:.1f} s")
    assert not bad
    assert dt < 60.0


def scanned_margin(cell, co, which, vg1, vg2):
    c = CFG.cell
    hold = C.hold_bias(c.vddm, c.vssm)
    if which == "W0M":
        v, f = flip_scan(lambda x: C.flips(cell, co, C.w0_bias(c.vddm, c.vssm, x), 1, hold), 0.0, c.vddm)
        return v[f].max()
    v, f = flip_scan(lambda x: C.flips(cell, co, C.w1_bias(c.vddm, c.vssm, vg1, vg2, x), 0, hold), 0.0, c.vddm)
    return c.vddm - v[f].min()


@criterion(7, "write-margin bisection matches a 1 mV grid scan within 1 mV")
def test_write_margin_vs_scan(note):
    c = CFG.cell
    cell = C.build_5tsdg(CFG)
    co = CFG.corner("TT", targets.HOT)
    vg1, vg2 = C.equalized_grounds(c.vssm, c.g_g1w1, c.g_g2, c.g_equ)
    w0, w1 = targets.write_margins(CFG)
    e0 = abs(w0.value - scanned_margin(cell, co, "W0M", vg1, vg2))
    e1 = abs(w1.value - scanned_margin(cell, co, "W1M", vg1, vg2))
    note(f"W0M {w0.value:.4f} V (err {e0 * 1e3:.2f} mV), W1M {w1.value:.4f} V (err {e1 * 1e3:.2f} mV)")
    assert e0 <= 1e-3 + 1e-9 and e1 <= 1e-3 + 1e-9


@criterion(8, "read disturb stays on the safe side of trip; TT trip 899 mV +/- 15%")
def test_read_stability(note):
    rows = targets.trip_table(CFG)
    tt = next(r for r in rows if r["corner"] == "TT")["trip"]
    note("; ".join(f"{r['corner']} {r['qmax'] * 1e3:.0f}<{r['trip'] * 1e3:.0f}<{r['qmin'] * 1e3:.0f} mV" for r in rows))
    assert all(r["qmax"] < r["trip"] < r["qmin"] and not r["upset"] for r in rows)
    assert abs(tt * 1e3 - 899.0) <= 0.15 * 899.0


@criterion(9, "RNM HVT > SVT > LVT at FS/120 C; SVT 172.3 mV +/- 30%")
def test_rnm_ordering(note):
    r = targets.rnm_by_access_vth(CFG)
    note(", ".join(f"{k} {v:.1f} mV" for k, v in r.items()))
    assert r["HVT"] > r["SVT"] > r["LVT"]
    assert abs(r["SVT"] - 172.3) <= 0.3 * 172.3


@criterion(10, "W1 delay LVT < SVT < HVT; 6T-ratioed 5T cannot write a 1")
def test_w1_delay_and_6t_ratio(note):
    d = targets.w1_delay_by_access_vth(CFG)
    r6 = targets.six_t_ratio_w1(CFG)
    note(", ".join(f"{k} {v * 1e12:.1f} ps" for k, v in d.items()) + f", 6T ratios write_fail={r6.write_fail}")
    assert None not in d.values()
    assert d["LVT"] < d["SVT"] < d["HVT"]
    assert r6.write_fail


@criterion(11, "TT write margins: W1M 0.5 +/- 0.15 V, W0M 0.4 +/- 0.15 V")
def test_write_margins(note):
    w0, w1 = targets.write_margins(CFG)
    note(f"W1M {w1.value:.3f} V, W0M {w0.value:.3f} V")
    assert abs(w1.value - 0.5) <= 0.15
    assert abs(w0.value - 0.4) <= 0.15


@criterion(12, "V_SSM excursion over 100 reads <= 25 mV (64 Kb)")
def test_standby_excursion(note):
    ex = targets.standby_excursion(CFG)
    note(f"{ex * 1e3:.2f} mV")
    assert ex <= 25e-3


@criterion(13, "FF/120 C power orderings and Conv6T/LP6T leakage ratio")
def test_power_orderings(note):
    ps = targets.power_summary(CFG)
    note(f"read -{ps['read_saving']:.1%}, R0-R1 {ps['r0_r1_gap']:.1%}, W0 -{ps['w0_saving']:.1%}, "
         f"W1 -{ps['w1_saving']:.1%}, leakage ratio {ps['leak_ratio']:.1f}")
    assert ps["read_saving"] >= 0.20
    assert 0.02 <= ps["r0_r1_gap"] <= 0.12
    assert ps["w0_saving"] >= 0.60
    assert 0.04 <= ps["w1_saving"] <= 0.14
    assert 11 <= ps["leak_ratio"] <= 45


@criterion(14, "read power increasing and convex in vddm; ground-swing term quadratic")
def test_vddm_shape(note):
    vs = targets.vddm_shape(CFG)
    note(f"increasing={vs['increasing']}, convex={vs['convex']}, quadratic err {vs['quadratic_err']:.1e}")
    assert vs["increasing"] and vs["convex"]
    assert vs["quadratic_err"] <= 1e-12


@criterion(15, "W1-disturb SNM > 50 mV at every corner, falls as g_equ -> 0")
def test_w1_disturb(note):
    d = targets.disturb_by_corner(CFG)
    sweep = [s for _, s in targets.disturb_vs_equalizer(CFG)]
    note(", ".join(f"{k} {v:.1f}" for k, v in d.items()) + " mV; sweep " + " > ".join(f"{s:.1f}" for s in sweep))
    assert min(d.values()) > 50.0
    assert all(a > b for a, b in zip(sweep, sweep[1:]))
