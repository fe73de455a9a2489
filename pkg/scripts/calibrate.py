"""Refit the free compact-model constants against the design targets.

Without --fit this only scores the constants in the given config (or the
built-in defaults).  With --fit it runs Nelder-Mead over a handful of
constants and prints the result as --set overrides.

    python scripts/calibrate.py
    python scripts/calibrate.py --fit --maxiter 60
"""
import argparse
import copy

import numpy as np
from scipy.optimize import minimize

from sram5t import cell as C
from sram5t import targets
from sram5t.config import load_config

# (section, field, log-scaled)
FREE = [("devices", "nmos_k", True), ("devices", "pmos_k", True),
        ("corners", "sigma_vth", False), ("cell", "g_equ", True)]

# name -> (centre, half band)
GOALS = {"trip_mv": (899.0, 0.15 * 899.0), "rnm_svt_mv": (172.3, 0.3 * 172.3),
         "w1m_v": (0.5, 0.15), "w0m_v": (0.4, 0.15), "leak_na": (80.6, 40.3)}


def apply(cfg, x):
    out = copy.deepcopy(cfg)
    for (sec, name, logged), v in zip(FREE, x):
        setattr(getattr(out, sec), name, float(np.exp(v) if logged else v))
    return out


def start(cfg):
    return np.array([np.log(getattr(getattr(cfg, s), n)) if lg else getattr(getattr(cfg, s), n)
                     for s, n, lg in FREE])


def metrics(cfg):
    c = cfg.cell
    tt = cfg.corner("TT", targets.HOT)
    m = {"trip_mv": 1e3 * C.trip_voltage(C.build_5tsdg(cfg), tt, C.hold_bias(c.vddm, c.vssm)),
         "rnm_svt_mv": targets.rnm_by_access_vth(cfg)["SVT"]}
    w0, w1 = targets.write_margins(cfg)
    m["w0m_v"] = np.nan if w0.value is None else w0.value
    m["w1m_v"] = np.nan if w1.value is None else w1.value
    m["leak_na"] = 1e9 * targets.power_summary(cfg)["leak_5t_subcol"]
    m["disturb_min_mv"] = min(targets.disturb_by_corner(cfg).values())
    return m


def loss(m):
    total = 0.0
    for k, (centre, band) in GOALS.items():
        if np.isnan(m[k]):
            return 1e6
        total += ((m[k] - centre) / band) ** 2
    # hard floor on the disturbed margin
    return total + 100.0 * max(0.0, 55.0 - m["disturb_min_mv"])


def report(cfg):
    m = metrics(cfg)
    for k, v in m.items():
        band = GOALS.get(k)
        tag = "" if band is None else f"  target {band[0]:g} +/- {band[1]:.3g}"
        print(f"{k:16s} {v:10.4f}{tag}")
    print(f"{'loss':16s} {loss(m):10.4f}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config")
    p.add_argument("--fit", action="store_true")
    p.add_argument("--maxiter", type=int, default=40)
    args = p.parse_args(argv)
    cfg = load_config(args.config)
    report(cfg)
    if not args.fit:
        return 0
    res = minimize(lambda x: loss(metrics(apply(cfg, x))), start(cfg), method="Nelder-Mead",
                   options={"maxiter": args.maxiter, "xatol": 1e-4, "fatol": 1e-3})
    best = apply(cfg, res.x)
    print()
    report(best)
    print()
    for sec, name, _ in FREE:
        print(f"--set {sec}.{name}={getattr(getattr(best, sec), name)!r}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
