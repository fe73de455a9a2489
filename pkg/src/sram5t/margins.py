"""Largest-square noise margin between two butterfly curves (Seevinck method).

Curve A is given as (vin, vout) with vin on the x axis (x = Q, y = Qz);
curve B as (vin, vout) with vin on the y axis (x = vout, y = vin).  In the
frame rotated by 45 degrees, every line of slope +1 crosses each monotone
curve once, so the inscribed square's diagonal in a lobe is the separation of
the two curves along that line; the side is the diagonal over sqrt(2).
"""
from __future__ import annotations

import numpy as np

SQRT2 = np.sqrt(2.0)


def _rotated(x, y):
    t = (y - x) / SQRT2
    s = (x + y) / SQRT2
    order = np.argsort(t, kind="stable")
    t, s = t[order], s[order]
    keep = np.concatenate([[True], np.diff(t) > 0])
    return t[keep], s[keep]


def seevinck_snm(curve_a: np.ndarray, curve_b: np.ndarray):
    """Return (snm, (upper_left_lobe, lower_right_lobe), monostable), all in volts."""
    ta, sa = _rotated(curve_a[:, 0], curve_a[:, 1])
    tb, sb = _rotated(curve_b[:, 1], curve_b[:, 0])
    lo, hi = max(ta[0], tb[0]), min(ta[-1], tb[-1])
    if hi <= lo:
        return 0.0, (0.0, 0.0), True
    t = np.union1d(ta, tb)
    t = t[(t >= lo) & (t <= hi)]
    d = np.interp(t, ta, sa) - np.interp(t, tb, sb)
    sign = np.sign(d)
    if not np.any(sign):
        return 0.0, (0.0, 0.0), True
    crossings = []
    # runs of exact zeros (curves touching on a sample) count once each
    zero = np.concatenate([[False], sign == 0, [False]])
    starts = np.nonzero(~zero[:-1] & zero[1:])[0]
    ends = np.nonzero(zero[:-1] & ~zero[1:])[0]
    crossings += [0.5 * (t[i] + t[j - 1]) for i, j in zip(starts, ends)]
    nz = np.nonzero(sign)[0]
    for i, j in zip(nz[:-1], nz[1:]):
        if j == i + 1 and sign[i] != sign[j]:
            # linear zero between samples i and j
            crossings.append(t[i] - d[i] * (t[j] - t[i]) / (d[j] - d[i]))
    crossings.sort()
    if len(crossings) < 3:
        return 0.0, (0.0, 0.0), True
    t_mid = crossings[len(crossings) // 2]
    upper = d[t > t_mid]
    lower = -d[t < t_mid]
    lobe_ul = max(0.0, float(upper.max())) / SQRT2 if upper.size else 0.0
    lobe_lr = max(0.0, float(lower.max())) / SQRT2 if lower.size else 0.0
    return min(lobe_ul, lobe_lr), (lobe_ul, lobe_lr), False
