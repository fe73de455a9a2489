"""Calibration target table: measured value, target band and pass flag for
every design target the default constants are tuned against."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import array as arr
from . import cell as cellmod
from . import power as pw
from . import sequencer as seq
from .config import Config

CORNERS = ("TT", "FF", "SS", "FS", "SF")
HOT = 120.0


@dataclass(frozen=True)
class Check:
    name: str
    measured: str
    target: str
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: measured {self.measured}; target {self.target}"


def within(x: float, centre: float, tol: float) -> bool:
    return abs(x - centre) <= tol


# --------------------------------------------------------------------------
# individual measurements (also used by the test-suite)


def trip_table(cfg: Config, temp: float = HOT, corners=CORNERS) -> list[dict]:
    cell = cellmod.build_5tsdg(cfg)
    c = cfg.cell
    rows = []
    for name in corners:
        co = cfg.corner(name, temp)
        trip = cellmod.trip_voltage(cell, co, cellmod.hold_bias(c.vddm, c.vssm))
        r0 = cellmod.read_disturb_levels(cell, co, 0, vddm=c.vddm, vssm=c.vssm)
        r1 = cellmod.read_disturb_levels(cell, co, 1, vddm=c.vddm, vssm=c.vssm)
        rows.append({"corner": name, "trip": trip, "qmax": r0.volts, "qmin": r1.volts,
                     "upset": r0.upset or r1.upset})
    return rows


def rnm_by_access_vth(cfg: Config, corner: str = "FS", temp: float = HOT) -> dict:
    co = cfg.corner(corner, temp)
    return {v: cellmod.rnm(cellmod.build_5tsdg(cfg, n3_vth=v), co, cfg.cell.vssm,
                           vddm=cfg.cell.vddm, vssm=cfg.cell.vssm).value
            for v in ("LVT", "SVT", "HVT")}


def w1_delay_by_access_vth(cfg: Config, corner: str = "FS", temp: float = HOT) -> dict:
    co = cfg.corner(corner, temp)
    out = {}
    for v in ("LVT", "SVT", "HVT"):
        try:
            out[v] = seq.w1_delay(cfg, co, n3_vth=v)
        except seq.WriteFail:
            out[v] = None
    return out


def six_t_ratio_w1(cfg: Config, corner: str = "TT", temp: float = HOT) -> cellmod.WriteMargin:
    """W1 of a 5T cell sized like a 6T with both grounds at V_SS."""
    cell = cellmod.build_5t_with_6t_ratios(cfg)
    co = cfg.corner(corner, temp)
    return cellmod.write_margin(cell, co, "W1M", vddm=cfg.cell.vddm, vssm=0.0, vg1=0.0, vg2=0.0)


def write_margins(cfg: Config, corner: str = "TT", temp: float = HOT) -> tuple:
    c = cfg.cell
    cell = cellmod.build_5tsdg(cfg)
    co = cfg.corner(corner, temp)
    vg1, vg2 = cellmod.equalized_grounds(c.vssm, c.g_g1w1, c.g_g2, c.g_equ)
    w0 = cellmod.write_margin(cell, co, "W0M", vddm=c.vddm, vssm=c.vssm)
    w1 = cellmod.write_margin(cell, co, "W1M", vddm=c.vddm, vssm=c.vssm, vg1=vg1, vg2=vg2)
    return w0, w1


def standby_excursion(cfg: Config, n_reads: int = 100, corner: str = "FF", temp: float = HOT) -> float:
    acfg = arr.ArrayConfig.from_config(cfg)
    leak = arr.vssm_leak_model(cfg, cfg.corner(corner, temp))
    word = arr.pattern_with_zeros(cfg.array.bits_per_word, cfg.array.pattern_zeros)
    return arr.read_mode_excursion(acfg, word, n_reads, leak)


def standby_level(cfg: Config, corner: str = "FF", temp: float = HOT) -> float:
    return arr.vssm_leak_model(cfg, cfg.corner(corner, temp)).standby_level()


def power_summary(cfg: Config, corner: str = "FF", temp: float = HOT) -> dict:
    co = cfg.corner(corner, temp)
    pulse = pw.write_pulse(cfg)
    T, L, C = pw.CellType.FIVE_T_SDG, pw.CellType.LP6T, pw.CellType.CONV6T

    def p(ct, op):
        return pw.op_power(cfg, ct, co, None, op, pulse=pulse).total_w

    r0, r1 = p(T, pw.OpKind.R0), p(T, pw.OpKind.R1)
    lp_read = p(L, pw.OpKind.R0)
    lp_write = p(L, pw.OpKind.W1)
    w0, w1 = p(T, pw.OpKind.W0), p(T, pw.OpKind.W1)
    leak_lp = pw.subcolumn_leakage(cfg, L, co)
    leak_conv = pw.subcolumn_leakage(cfg, C, co)
    return {
        "read_saving": pw.reduction(max(r0, r1), lp_read),
        "r0_r1_gap": (r0 - r1) / r0,
        "w0_saving": pw.reduction(w0, lp_write),
        "w1_saving": pw.reduction(w1, lp_write),
        "leak_ratio": leak_conv / leak_lp,
        "leak_5t_subcol": pw.subcolumn_leakage(cfg, T, co),
    }


def vddm_shape(cfg: Config, vddm_list=None) -> dict:
    vddm_list = list(np.round(np.arange(1.0, 1.61, 0.1), 10)) if vddm_list is None else vddm_list
    rows = pw.read_power_vs_vddm(cfg, vddm_list)
    read = np.array([r["read_w"] for r in rows])
    ground = np.array([r["ground_swing_w"] for r in rows])
    vs = np.array([r["vssm"] for r in rows])
    d1, d2 = np.diff(read), np.diff(read, 2)
    quad = ground / ground[0] - (vs / vs[0]) ** 2
    return {"increasing": bool(np.all(d1 > 0)), "convex": bool(np.all(d2 > 0)),
            "quadratic_err": float(np.max(np.abs(quad))), "rows": rows}


def disturb_by_corner(cfg: Config, temp: float = HOT) -> dict:
    return {n: seq.w1_disturb_scan(cfg, cfg.corner(n, temp)) for n in CORNERS}


def disturb_vs_equalizer(cfg: Config, corner: str = "FF", temp: float = HOT, points: int = 6) -> list:
    """(g_equ, SNM) from the default conductance down to 0."""
    co = cfg.corner(corner, temp)
    gs = list(cfg.cell.g_equ * np.linspace(1.0, 0.0, points))
    return [(g, seq.w1_disturb_scan(cfg, co, g_equ=g)) for g in gs]


def delay_table(cfg: Config, temp: float = HOT) -> list[dict]:
    c5 = cellmod.build_5tsdg(cfg)
    c6 = cellmod.build_6t(cfg)
    rows = []
    for n in CORNERS:
        co = cfg.corner(n, temp)
        rows.append({"corner": n,
                     "w1_5t": seq.w1_delay(cfg, co, cell=c5), "w0_5t": seq.w0_delay(cfg, co, cell=c5),
                     "w1_6t": seq.w1_delay(cfg, co, cell=c6), "w0_6t": seq.w0_delay(cfg, co, cell=c6),
                     "read_5t": seq.read_delay(cfg, co, cell=c5)})
    return rows


# --------------------------------------------------------------------------
# the table


def _fmt(x, unit="", scale=1.0, digits=1):
    return "n/a" if x is None else f"{x * scale:.{digits}f}{unit}"


def calibrate_check(cfg: Config) -> list[Check]:
    out = []
    trips = trip_table(cfg)
    safe = all(r["qmax"] < r["trip"] < r["qmin"] and not r["upset"] for r in trips)
    out.append(Check("read disturb vs trip (all corners, 120 C)",
                     "; ".join(f"{r['corner']} {r['qmax'] * 1e3:.0f}<{r['trip'] * 1e3:.0f}<{r['qmin'] * 1e3:.0f}"
                               for r in trips),
                     "Q_max < trip < Q_min", safe))
    tt = next(r for r in trips if r["corner"] == "TT")["trip"] * 1e3
    out.append(Check("trip voltage TT/120 C", f"{tt:.1f} mV", "899 mV +/- 15%", within(tt, 899.0, 0.15 * 899.0)))

    rn = rnm_by_access_vth(cfg)
    out.append(Check("RNM ordering FS/120 C", f"HVT {rn['HVT']:.1f} > SVT {rn['SVT']:.1f} > LVT {rn['LVT']:.1f} mV",
                     "HVT > SVT > LVT", rn["HVT"] > rn["SVT"] > rn["LVT"]))
    out.append(Check("RNM SVT FS/120 C", f"{rn['SVT']:.1f} mV", "172.3 mV +/- 30%",
                     within(rn["SVT"], 172.3, 0.3 * 172.3)))

    wd = w1_delay_by_access_vth(cfg)
    ok = None not in wd.values() and wd["LVT"] < wd["SVT"] < wd["HVT"]
    out.append(Check("W1 delay ordering FS/120 C",
                     " < ".join(f"{k} {_fmt(v, ' ps', 1e12)}" for k, v in wd.items()),
                     "LVT < SVT < HVT", ok))
    out.append(Check("W1 delay SVT FS/120 C", _fmt(wd["SVT"], " ps", 1e12), "116.4 ps +/- 40%",
                     wd["SVT"] is not None and within(wd["SVT"] * 1e12, 116.4, 0.4 * 116.4)))
    r6 = six_t_ratio_w1(cfg)
    out.append(Check("5T with 6T ratios, W1", "WriteFail" if r6.write_fail else f"W1M {r6.value:.3f} V",
                     "WriteFail", r6.write_fail))

    dt = delay_table(cfg)
    ratios = [r["w1_5t"] / r["w1_6t"] for r in dt]
    out.append(Check("W1 delay 5T / LP6T", ", ".join(f"{r['corner']} {x:.2f}" for r, x in zip(dt, ratios)),
                     "[1.05, 1.45] every corner", all(1.05 <= x <= 1.45 for x in ratios)))
    out.append(Check("W0 delay < W1 delay", ", ".join(f"{r['corner']} {r['w0_5t'] * 1e12:.0f}<{r['w1_5t'] * 1e12:.0f} ps"
                                                      for r in dt),
                     "every corner", all(r["w0_5t"] < r["w1_5t"] for r in dt)))

    w0, w1 = write_margins(cfg)
    out.append(Check("W1M TT", _fmt(w1.value, " V", digits=3), "0.5 V +/- 0.15 V",
                     w1.value is not None and within(w1.value, 0.5, 0.15)))
    out.append(Check("W0M TT", _fmt(w0.value, " V", digits=3), "0.4 V +/- 0.15 V",
                     w0.value is not None and within(w0.value, 0.4, 0.15)))

    ex = standby_excursion(cfg)
    out.append(Check("V_SSM excursion, 100 reads, 64 Kb", f"{ex * 1e3:.2f} mV", "<= 25 mV", ex <= 25e-3))
    lvl = standby_level(cfg)
    out.append(Check("V_SSM standby level FF/120 C", f"{lvl * 1e3:.1f} mV", "600 mV +/- 5%",
                     within(lvl, cfg.cell.vssm, 0.05 * cfg.cell.vssm)))

    ps = power_summary(cfg)
    out.append(Check("read power saving vs LP6T", f"{ps['read_saving'] * 100:.1f}%", ">= 20%",
                     ps["read_saving"] >= 0.20))
    out.append(Check("R0 - R1 gap", f"{ps['r0_r1_gap'] * 100:.1f}%", "2-12%", 0.02 <= ps["r0_r1_gap"] <= 0.12))
    out.append(Check("W0 saving vs LP6T write", f"{ps['w0_saving'] * 100:.1f}%", ">= 60%", ps["w0_saving"] >= 0.60))
    out.append(Check("W1 saving vs LP6T write", f"{ps['w1_saving'] * 100:.1f}%", "4-14%",
                     0.04 <= ps["w1_saving"] <= 0.14))
    out.append(Check("leakage Conv6T / LP6T", f"{ps['leak_ratio']:.1f}", "[11, 45]", 11 <= ps["leak_ratio"] <= 45))
    lk = ps["leak_5t_subcol"] * 1e9
    out.append(Check("5TSDG 64-cell leakage FF/120 C", f"{lk:.1f} nA", "80.6 nA +/- 50%", within(lk, 80.6, 40.3)))

    vs = vddm_shape(cfg)
    out.append(Check("read power vs vddm", f"increasing={vs['increasing']} convex={vs['convex']}",
                     "strictly increasing and convex", vs["increasing"] and vs["convex"]))
    out.append(Check("ground-swing term vs (vddm - 0.7)^2", f"max rel err {vs['quadratic_err']:.1e}",
                     "exactly quadratic", vs["quadratic_err"] < 1e-12))

    dist = disturb_by_corner(cfg)
    out.append(Check("W1 disturb SNM", ", ".join(f"{k} {v:.1f}" for k, v in dist.items()) + " mV",
                     "> 50 mV every corner", min(dist.values()) > 50.0))
    sweep = disturb_vs_equalizer(cfg)
    snms = [s for _, s in sweep]
    out.append(Check("disturb SNM as g_equ -> 0", " > ".join(f"{s:.1f}" for s in snms) + " mV",
                     "strictly decreasing", all(a > b for a, b in zip(snms, snms[1:]))))
    return out
